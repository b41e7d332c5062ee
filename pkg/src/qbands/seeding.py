"""Deterministic random-stream fan-out.

Every stochastic component draws from a counter-based generator (Philox)
keyed by a master seed plus a path of non-negative integers, so any part of
a run can be reproduced bit-exactly in isolation.  The scheme is simply
``SeedSequence([master, *path])``; the path components used by the CLI are
documented in the README.
"""
from __future__ import annotations

import numpy as np


def spawn_rng(master: int, *path: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``(master, *path)``."""
    ss = np.random.SeedSequence([int(master), *[int(p) for p in path]])
    return np.random.Generator(np.random.Philox(ss))


def spawn_seed(master: int, *path: int) -> int:
    """Stable integer sub-seed, usable as the master of a nested fan-out."""
    ss = np.random.SeedSequence([int(master), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
