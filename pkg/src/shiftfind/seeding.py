"""Reproducible child-seed derivation.

Every randomized component takes an integer root seed; sub-components get
seeds derived from ``(root, *keys)`` so that results never depend on
execution order.
"""

from __future__ import annotations

import numpy as np


def derive_seed(root: int, *keys: int) -> int:
    """Return a 63-bit seed determined only by ``root`` and ``keys``."""
    seq = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def rng(root: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *keys))
