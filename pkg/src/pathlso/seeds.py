"""Named, reproducible random substreams derived from one experiment seed.

Every stage of an experiment (dataset generation, per-iteration subset
draws, acquisition, probes, training) owns a stream keyed by a stable name,
so adding a stage or reordering calls never perturbs the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(seed: int, name: str) -> int:
    """Stable 128-bit child seed for a named substream."""
    digest = hashlib.sha256(f"{name}|{seed}".encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def substream(seed: int, name: str) -> np.random.Generator:
    """Fresh generator for the named substream of ``seed``."""
    return np.random.default_rng(child_seed(seed, name))
