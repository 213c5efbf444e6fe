"""Grammar, descriptors, oracle, sampling, enumeration, dataset files."""

import functools

import numpy as np
import pytest

from pathlso.molecules import (
    ALPHABET,
    ENUMERATION_LIMIT,
    FEATURE_NAMES,
    InvalidMoleculeError,
    MAX_LEN,
    MIN_LEN,
    enumerate_valid,
    featurize,
    min_completion,
    oracle_pic50,
    random_molecule,
    read_dataset,
    require_valid,
    step_choices,
    validate,
    write_dataset,
)

# Valid-string counts by exact length, frozen from the counting recursion
# below (and reproduced live in test_enumeration_matches_counting_recursion).
COUNTS_BY_LENGTH = {4: 272, 5: 1216, 6: 5648, 7: 27008, 8: 132096}


@functools.lru_cache(maxsize=None)
def _count(first: bool, open_count: int, last_open: bool, remaining: int) -> int:
    """Number of valid completions, stated directly from the grammar rules.

    Independent of step_choices: infeasible branches simply contribute zero.
    """
    if remaining == 0:
        return 1 if open_count == 0 else 0
    total = 4 * _count(False, open_count, False, remaining - 1)
    if not first and open_count < 2:
        total += _count(False, open_count + 1, True, remaining - 1)
    if open_count >= 1 and not last_open:
        total += _count(False, open_count - 1, False, remaining - 1)
    return total


# ===================================================================
# validation
# ===================================================================

VALID_EXAMPLES = [
    "CCCC",
    "CC(N)O",
    "NCO((N))",
    "N((C))((O))((N))",
    "C" * MAX_LEN,
    "FONC",
    "CN(CO)",
]

INVALID_EXAMPLES = [
    "",  # empty
    "CCC",  # too short
    "C" * (MAX_LEN + 1),  # too long
    "(CCC)",  # leading parenthesis
    "CC()",  # empty ring
    "C(((C)))",  # depth 3
    "CC(C",  # unbalanced open
    "CC)C(",  # close before open
    "CCXC",  # unknown token
    "cccc",  # case matters
    "CC C",  # whitespace
]


def test_validate_accepts_known_good():
    for m in VALID_EXAMPLES:
        assert validate(m), m


def test_validate_rejects_known_bad():
    for m in INVALID_EXAMPLES:
        assert not validate(m), m


def test_require_valid_raises_with_offender_in_message():
    require_valid("CC(N)O")
    with pytest.raises(InvalidMoleculeError, match=r"CC\(\)"):
        require_valid("CC()")


def test_validate_never_raises_on_arbitrary_text():
    rng = np.random.default_rng(0)
    pool = ALPHABET + "xX 1)"
    for _ in range(500):
        n = int(rng.integers(0, 20))
        s = "".join(pool[int(i)] for i in rng.integers(0, len(pool), size=n))
        validate(s)


# ===================================================================
# descriptors and oracle
# ===================================================================


def test_featurize_hand_example():
    f = featurize("CN(CO)")
    assert FEATURE_NAMES == ("n_c", "n_n", "n_o", "n_f", "rings", "length", "motif")
    assert f.tolist() == [2.0, 1.0, 1.0, 0.0, 1.0, 6.0, 1.0]


def test_featurize_motif_uses_atom_subsequence():
    # parentheses are transparent to the motif
    assert featurize("N(C)ON")[6] == 1.0
    assert featurize("NOCN")[6] == 0.0
    assert featurize("CCCC")[6] == 0.0


def test_featurize_rejects_invalid():
    with pytest.raises(InvalidMoleculeError):
        featurize("CC()")


def test_oracle_hand_values():
    # 1 + 0.4 nN + 0.3 nO - 0.2 nF + 1.2 rings + 0.8 motif
    assert oracle_pic50("CCCC") == 1.0
    assert oracle_pic50("CN(CO)") == pytest.approx(3.7, abs=1e-12)
    assert oracle_pic50("NCO((N))") == pytest.approx(5.3, abs=1e-12)


def test_oracle_clamps_to_bounds():
    # raw 1 - 0.2*6 = -0.2 and raw 1 + 0.8 + 0.3 + 7.2 + 0.8 = 10.1
    assert oracle_pic50("FFFFFF") == 0.0
    assert oracle_pic50("N((C))((O))((N))") == 10.0


def test_oracle_matches_descriptor_formula_on_random_molecules():
    rng = np.random.default_rng(1)
    coef = np.array([0.0, 0.4, 0.3, -0.2, 1.2, 0.0, 0.8])
    for _ in range(300):
        m = random_molecule(rng)
        raw = 1.0 + float(coef @ featurize(m))
        assert oracle_pic50(m) == pytest.approx(min(10.0, max(0.0, raw)), abs=1e-12)


# ===================================================================
# prefix feasibility helpers
# ===================================================================


def test_min_completion():
    assert min_completion(0, False) == 0
    assert min_completion(1, False) == 1
    assert min_completion(1, True) == 2
    assert min_completion(2, True) == 3


def test_step_choices_first_position_is_atoms_only():
    assert step_choices(0, 0, False, MAX_LEN, exact=False) == "CNOF"


def test_step_choices_blocks_immediate_close():
    choices = step_choices(2, 1, True, 10, exact=False)
    assert ")" not in choices
    assert "(" in choices  # depth 2 still available


def test_step_choices_respects_depth_cap():
    assert "(" not in step_choices(3, 2, False, 10, exact=False)


def test_step_choices_tight_budget_forces_closing():
    # one slot left with one ring open: only ')' completes
    assert step_choices(6, 1, False, 1, exact=True) == ")"
    # two slots, trailing '(': only an atom then ')' can finish
    assert step_choices(6, 1, True, 2, exact=True) == "CNOF"


# ===================================================================
# sampling and enumeration
# ===================================================================


def test_random_molecules_are_valid_and_in_range():
    rng = np.random.default_rng(7)
    lengths = set()
    for _ in range(2000):
        m = random_molecule(rng)
        assert validate(m)
        lengths.add(len(m))
    assert min(lengths) == MIN_LEN
    assert max(lengths) == MAX_LEN


def test_random_molecule_exact_length_range():
    rng = np.random.default_rng(8)
    for _ in range(200):
        assert len(random_molecule(rng, (7, 7))) == 7


def test_random_molecule_rejects_bad_range():
    rng = np.random.default_rng(9)
    with pytest.raises(ValueError):
        random_molecule(rng, (2, 8))
    with pytest.raises(ValueError):
        random_molecule(rng, (8, 4))


def test_random_molecule_reproducible_from_seed():
    a = [random_molecule(np.random.default_rng(3)) for _ in range(5)]
    b = [random_molecule(np.random.default_rng(3)) for _ in range(5)]
    assert a == b


def test_enumeration_matches_counting_recursion():
    mols = enumerate_valid(8)
    by_len: dict[int, int] = {}
    for m in mols:
        by_len[len(m)] = by_len.get(len(m), 0) + 1
    assert len(mols) == len(set(mols))
    for n in range(MIN_LEN, 9):
        assert by_len[n] == _count(True, 0, False, n)
    assert by_len == COUNTS_BY_LENGTH


def test_enumeration_output_is_valid_and_deterministic():
    mols = enumerate_valid(5)
    assert all(validate(m) for m in mols)
    assert mols[0] == "CCCC"
    assert mols == enumerate_valid(5)
    assert len(mols) == COUNTS_BY_LENGTH[4] + COUNTS_BY_LENGTH[5]


def test_enumeration_best_oracle_value():
    mols = enumerate_valid(8)
    scores = [oracle_pic50(m) for m in mols]
    assert max(scores) == pytest.approx(5.3, abs=1e-12)
    assert oracle_pic50("NCO((N))") == max(scores)


def test_enumeration_guard():
    with pytest.raises(ValueError):
        enumerate_valid(ENUMERATION_LIMIT + 1)
    assert enumerate_valid(3) == []


# ===================================================================
# dataset files
# ===================================================================


def test_dataset_roundtrip_labeled(tmp_path):
    path = str(tmp_path / "data.tsv")
    mols = ["CCCC", "CN(CO)", "NCO((N))"]
    scores = [1.0, 3.7, 5.3]
    write_dataset(path, mols, scores)
    got_m, got_s = read_dataset(path)
    assert got_m == mols
    assert got_s == pytest.approx(scores)


def test_dataset_roundtrip_unlabeled(tmp_path):
    path = str(tmp_path / "data.tsv")
    write_dataset(path, ["CCCC", "FONC"])
    got_m, got_s = read_dataset(path)
    assert got_m == ["CCCC", "FONC"]
    assert got_s is None


def test_dataset_score_formatting_is_six_significant_digits(tmp_path):
    path = str(tmp_path / "data.tsv")
    write_dataset(path, ["CCCC"], [1.23456789])
    assert open(path).read() == "CCCC\t1.23457\n"


def test_dataset_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_dataset(str(tmp_path / "x.tsv"), ["CCCC"], [1.0, 2.0])


def test_dataset_mixed_labels_rejected(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("CCCC\t1.0\nFONC\n")
    with pytest.raises(ValueError):
        read_dataset(str(path))
