"""Mass-action model of PARP1/p53 competition for DNA double-strand breaks.

Seven species: free breaks D, free PARP1 P_f, repair complex PD, free p53 G,
damage-sensing complex GD, procaspase C, activated caspase C_star.  Six
irreversible mass-action reactions:

    r1: P_f + D  -> PD            rate k1 * P_f * D
    r2: PD       -> P_f + D      rate k2 * PD
    r3: PD       -> P_f          rate k3 * PD      (break repaired, removed)
    r4: G + D    -> GD           rate k4 * G * D
    r5: GD       -> G + D        rate k5 * GD
    r6: GD + C   -> GD + C_star  rate k6 * GD * C  (catalytic activation)

Inhibitor action enters through the initial condition only: an occupancy
fraction phi removes phi of the PARP1 pool, so P_f(0) = P_tot * (1 - phi).
The therapeutic score of a compound is C_star at the horizon.  Three dose
variants (viable, modified, impractical) differ only in inhibitor dose, which
shifts the score-versus-pIC50 curve left or right without changing its shape.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from scipy.integrate import solve_ivp

APOPTOSIS_THRESHOLD = 5000.0

SPECIES = ("d", "p_f", "pd", "g", "gd", "c", "c_star")


class IntegrationError(RuntimeError):
    """Integration failed or produced a beyond-tolerance negative species.

    Attributes:
        t: time at which the failure was detected.
        state: species vector at that time.
    """

    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(message)
        self.t = float(t)
        self.state = np.asarray(state, dtype=float)


@dataclass(frozen=True)
class PathwayParams:
    """Copy numbers, rate constants, and solver settings for the network.

    Attributes:
        d0: initial double-strand break count.
        p_tot: total PARP1 pool.
        g_tot: total p53 pool.
        c_tot: total procaspase pool; also the score plateau ceiling.
        k1: P_f + D binding rate (per copy per time).
        k2: PD dissociation rate (per time).
        k3: repair rate, removes the bound break (per time).
        k4: G + D binding rate (per copy per time).
        k5: GD dissociation rate (per time).
        k6: caspase activation rate by GD (per copy per time).
        t_end: simulation horizon.
        rtol: solver relative tolerance.
        atol: solver absolute tolerance; also the negativity clip threshold.
    """

    d0: float = 500.0
    p_tot: float = 1000.0
    g_tot: float = 1000.0
    c_tot: float = 15000.0
    k1: float = 1e-3
    k2: float = 1e-2
    k3: float = 5e-2
    k4: float = 1e-4
    k5: float = 1e-2
    k6: float = 2e-5
    t_end: float = 600.0
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be > 0")


@dataclass(frozen=True)
class PathwayVariant:
    """A named inhibitor dose level (molar)."""

    name: str
    dose: float

    def __post_init__(self):
        if self.dose <= 0:
            raise ValueError("dose must be > 0")


VARIANTS = {
    "viable": PathwayVariant("viable", 1e-6),
    "modified": PathwayVariant("modified", 1e-4),
    "impractical": PathwayVariant("impractical", 1e-1),
}


@dataclass(frozen=True)
class SimState:
    """Species copy numbers at one time point."""

    t: float
    d: float
    p_f: float
    pd: float
    g: float
    gd: float
    c: float
    c_star: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, s) for s in SPECIES], dtype=float)


def occupancy(pic50: float, dose: float) -> float:
    """Equilibrium fraction of PARP1 bound by inhibitor.

    phi = dose / (dose + 10**(-pic50)); strictly increasing in pic50, equals
    0.5 exactly when pic50 = -log10(dose).
    """
    if dose <= 0:
        raise ValueError("dose must be > 0")
    return dose / (dose + 10.0 ** (-pic50))


def _rhs(params: PathwayParams):
    k1, k2, k3 = params.k1, params.k2, params.k3
    k4, k5, k6 = params.k4, params.k5, params.k6

    def rhs(t, y):
        d, p_f, pd, g, gd, c, _ = y
        r1 = k1 * p_f * d
        r2 = k2 * pd
        r3 = k3 * pd
        r4 = k4 * g * d
        r5 = k5 * gd
        r6 = k6 * gd * c
        return (
            -r1 + r2 - r4 + r5,
            -r1 + r2 + r3,
            r1 - r2 - r3,
            -r4 + r5,
            r4 - r5,
            -r6,
            r6,
        )

    return rhs


def initial_state(params: PathwayParams, phi: float) -> np.ndarray:
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi {phi} outside [0, 1]")
    return np.array(
        [params.d0, params.p_tot * (1.0 - phi), 0.0, params.g_tot, 0.0, params.c_tot, 0.0]
    )


def _integrate(params: PathwayParams, phi: float, t_eval) -> tuple[np.ndarray, np.ndarray]:
    sol = solve_ivp(
        _rhs(params),
        (0.0, params.t_end),
        initial_state(params, phi),
        method="RK45",  # Dormand-Prince 5(4) pair
        rtol=params.rtol,
        atol=params.atol,
        t_eval=t_eval,
    )
    if not sol.success:
        t_last = sol.t[-1] if sol.t.size else 0.0
        y_last = sol.y[:, -1] if sol.t.size else initial_state(params, phi)
        raise IntegrationError(f"solver failed: {sol.message}", t_last, y_last)
    y = sol.y
    if np.any(y < -params.atol):
        j = int(np.argmax(np.any(y < -params.atol, axis=0)))
        raise IntegrationError(
            "negative species excursion beyond absolute tolerance",
            sol.t[j],
            y[:, j],
        )
    # excursions within tolerance are numerical dust
    return sol.t, np.clip(y, 0.0, None)


def simulate(params: PathwayParams, phi: float) -> SimState:
    """Integrate the network to t_end for a given PARP1 occupancy fraction.

    Args:
        params: network parameters.
        phi: fraction of PARP1 inactivated by inhibitor, in [0, 1].

    Returns:
        SimState at t_end.

    Raises:
        IntegrationError: solver failure or beyond-tolerance negativity.
    """
    t, y = _integrate(params, phi, None)
    return SimState(float(t[-1]), *(float(v) for v in y[:, -1]))


def simulate_trajectory(
    params: PathwayParams, phi: float, n_points: int = 241
) -> tuple[np.ndarray, np.ndarray]:
    """Like simulate, but returns the trajectory on a uniform time grid.

    Returns:
        (t, y): t of shape (n_points,), y of shape (7, n_points) in SPECIES
        order.
    """
    t_eval = np.linspace(0.0, params.t_end, n_points)
    return _integrate(params, phi, t_eval)


def therapeutic_score(
    pic50: float, variant: PathwayVariant, params: PathwayParams | None = None
) -> float:
    """Final activated-caspase count for a compound of the given potency."""
    p = params if params is not None else PathwayParams()
    return simulate(p, occupancy(pic50, variant.dose)).c_star


def apoptosis_triggered(score: float) -> bool:
    """True exactly when the score is strictly above the 5000-copy threshold."""
    return score > APOPTOSIS_THRESHOLD


def dose_response(
    variant: PathwayVariant,
    grid: np.ndarray | list[float],
    params: PathwayParams | None = None,
) -> list[tuple[float, float]]:
    """Score at each grid pIC50, in grid order.

    Args:
        variant: dose variant.
        grid: non-empty ascending pIC50 values.
        params: network parameters; defaults used when omitted.
    """
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be sorted ascending")
    return [(float(p), therapeutic_score(float(p), variant, params)) for p in g]


def format_dose_response_csv(pairs: list[tuple[float, float]]) -> str:
    """Response curve as CSV text (header pic50,score, 6 significant digits)."""
    lines = ["pic50,score"]
    lines += [f"{p:.6g},{s:.6g}" for p, s in pairs]
    return "\n".join(lines) + "\n"


def write_dose_response_csv(path: str, pairs: list[tuple[float, float]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_dose_response_csv(pairs))
