"""Toy molecule grammar: validity rules, descriptors, and a potency oracle.

A molecule is a plain token string over the alphabet ``C N O F ( )``.  The
string itself is the canonical form; two molecules are equal exactly when
their strings are equal.  Validity rules:

  1. length between 4 and 16 tokens,
  2. parentheses balanced with nesting depth at most 2,
  3. the first token is an atom,
  4. no empty ``()`` pair.

Every generator in the package (random sampling, constrained decoding,
exhaustive enumeration) produces only valid strings, so downstream code may
assume validity and only the boundaries re-check it.
"""

from __future__ import annotations

import numpy as np

ATOM_TOKENS = "CNOF"
OPEN_TOKEN = "("
CLOSE_TOKEN = ")"
ALPHABET = ATOM_TOKENS + OPEN_TOKEN + CLOSE_TOKEN

MIN_LEN = 4
MAX_LEN = 16
MAX_DEPTH = 2

ENUMERATION_LIMIT = 10

FEATURE_NAMES = ("n_c", "n_n", "n_o", "n_f", "rings", "length", "motif")
N_FEATURES = len(FEATURE_NAMES)

ORACLE_MIN = 0.0
ORACLE_MAX = 10.0


class InvalidMoleculeError(ValueError):
    """Raised when an operation requiring a valid molecule receives garbage."""


def validate(tokens: str) -> bool:
    """Check all grammar rules; total function, never raises.

    Args:
        tokens: candidate token string.

    Returns:
        True iff ``tokens`` is a valid molecule.
    """
    n = len(tokens)
    if not MIN_LEN <= n <= MAX_LEN:
        return False
    if tokens[0] not in ATOM_TOKENS:
        return False
    depth = 0
    prev = ""
    for ch in tokens:
        if ch == OPEN_TOKEN:
            depth += 1
            if depth > MAX_DEPTH:
                return False
        elif ch == CLOSE_TOKEN:
            if depth == 0 or prev == OPEN_TOKEN:
                return False
            depth -= 1
        elif ch not in ATOM_TOKENS:
            return False
        prev = ch
    return depth == 0


def require_valid(m: str) -> None:
    """Raise InvalidMoleculeError unless ``m`` is a valid molecule."""
    if not validate(m):
        raise InvalidMoleculeError(f"not a valid molecule: {m!r}")


def featurize(m: str) -> np.ndarray:
    """Compute the 7-component descriptor vector of a valid molecule.

    Component order follows FEATURE_NAMES: the four atom counts (C, N, O,
    F), the ring count (number of ``(`` tokens), the token length, and a
    motif indicator that is 1 when the atom-only subsequence contains a
    contiguous ``NCO`` and 0 otherwise.
    """
    require_valid(m)
    atoms_only = "".join(ch for ch in m if ch in ATOM_TOKENS)
    return np.array(
        [
            m.count("C"),
            m.count("N"),
            m.count("O"),
            m.count("F"),
            m.count(OPEN_TOKEN),
            len(m),
            1.0 if "NCO" in atoms_only else 0.0,
        ],
        dtype=float,
    )


def oracle_pic50(m: str) -> float:
    """Synthetic ground-truth potency of a valid molecule.

    Linear in the descriptors, clamped to [0, 10]:
    ``1 + 0.4 nN + 0.3 nO - 0.2 nF + 1.2 rings + 0.8 motif``.
    """
    f = featurize(m)
    raw = 1.0 + 0.4 * f[1] + 0.3 * f[2] - 0.2 * f[3] + 1.2 * f[4] + 0.8 * f[6]
    return float(min(ORACLE_MAX, max(ORACLE_MIN, raw)))


def min_completion(open_count: int, last_open: bool) -> int:
    """Fewest further tokens that can turn the prefix into a balanced string.

    Every open parenthesis needs a closer, and a closer may not immediately
    follow its opener, so a trailing ``(`` costs one extra filler atom.
    """
    return open_count + (1 if last_open else 0)


def step_choices(
    pos: int, open_count: int, last_open: bool, budget: int, exact: bool
) -> str:
    """Tokens that keep a valid completion reachable within ``budget`` slots.

    ``budget`` counts the remaining positions including the one being chosen.
    With ``exact`` the string must use the whole budget (no early stop); the
    caller handles stopping otherwise.  The minimum-length rule is enforced
    by the caller via ``budget`` and stop conditions, except that growing to
    MIN_LEN must stay possible, which a positive budget guarantees because
    atoms are always stackable.
    """
    out = []
    for tok in ALPHABET:
        if tok == OPEN_TOKEN:
            if pos == 0 or open_count >= MAX_DEPTH:
                continue
            need = min_completion(open_count + 1, True)
        elif tok == CLOSE_TOKEN:
            if open_count == 0 or last_open:
                continue
            need = min_completion(open_count - 1, False)
        else:
            need = min_completion(open_count, False)
        slots_after = budget - 1
        if need > slots_after:
            continue
        if exact and pos + 1 + slots_after < MIN_LEN:
            # unreachable given budget >= MIN_LEN at pos 0, kept as a guard
            continue
        out.append(tok)
    return "".join(out)


def random_molecule(
    rng: np.random.Generator, length_range: tuple[int, int] = (MIN_LEN, MAX_LEN)
) -> str:
    """Sample one valid molecule of uniformly chosen target length.

    At each position the token is drawn uniformly from the choices that keep
    an exact-length completion reachable, so the result is valid by
    construction and the stream is reproducible from the generator state.

    Args:
        rng: numpy Generator; caller-owned, never shared between threads.
        length_range: inclusive (lo, hi) bounds inside [4, 16].
    """
    lo, hi = length_range
    if not (MIN_LEN <= lo <= hi <= MAX_LEN):
        raise ValueError(f"length_range {length_range} outside [{MIN_LEN}, {MAX_LEN}]")
    n = int(rng.integers(lo, hi + 1))
    tokens: list[str] = []
    open_count = 0
    last_open = False
    for pos in range(n):
        choices = step_choices(pos, open_count, last_open, n - pos, exact=True)
        tok = choices[int(rng.integers(len(choices)))]
        tokens.append(tok)
        if tok == OPEN_TOKEN:
            open_count += 1
            last_open = True
        else:
            if tok == CLOSE_TOKEN:
                open_count -= 1
            last_open = False
    return "".join(tokens)


def enumerate_valid(max_len: int) -> list[str]:
    """Every valid molecule of length <= max_len, depth-first, no duplicates.

    Deterministic order: token order C, N, O, F, (, ) at each position, a
    string emitted as soon as its prefix is a complete valid molecule.

    Args:
        max_len: cap on token length; guarded at ENUMERATION_LIMIT because
            the space grows roughly fivefold per token.
    """
    if max_len > ENUMERATION_LIMIT:
        raise ValueError(f"max_len {max_len} exceeds limit {ENUMERATION_LIMIT}")
    out: list[str] = []
    prefix: list[str] = []

    def grow(open_count: int, last_open: bool) -> None:
        pos = len(prefix)
        if pos >= MIN_LEN and open_count == 0:
            out.append("".join(prefix))
        if pos == max_len:
            return
        for tok in step_choices(pos, open_count, last_open, max_len - pos, False):
            prefix.append(tok)
            if tok == OPEN_TOKEN:
                grow(open_count + 1, True)
            elif tok == CLOSE_TOKEN:
                grow(open_count - 1, False)
            else:
                grow(open_count, False)
            prefix.pop()

    grow(0, False)
    return out


def write_dataset(
    path: str, molecules: list[str], scores: list[float] | None = None
) -> None:
    """Write one molecule per line, optionally with a tab-separated score."""
    if scores is not None and len(scores) != len(molecules):
        raise ValueError("molecules and scores must have equal length")
    with open(path, "w", encoding="utf-8") as fh:
        for i, m in enumerate(molecules):
            if scores is None:
                fh.write(f"{m}\n")
            else:
                fh.write(f"{m}\t{scores[i]:.6g}\n")


def read_dataset(path: str) -> tuple[list[str], list[float] | None]:
    """Read a dataset file; returns (molecules, scores or None)."""
    molecules: list[str] = []
    scores: list[float] = []
    saw_score = False
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" in line:
                m, s = line.split("\t", 1)
                molecules.append(m)
                scores.append(float(s))
                saw_score = True
            else:
                molecules.append(line)
    if saw_score and len(scores) != len(molecules):
        raise ValueError(f"mixed labeled and unlabeled lines in {path}")
    return molecules, (scores if saw_score else None)
