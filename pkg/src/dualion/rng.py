"""Deterministic random streams for Monte Carlo experiments.

Every experiment draws from counter-based Philox streams keyed by
(master seed, experiment id, sweep index).  Within a stream, sampled
arrays are indexed by shot number, so results are bit-reproducible and
independent of how shots are batched.
"""
from __future__ import annotations

import numpy as np

# Stable experiment ids used in stream derivation; append only.
EXPERIMENT_IDS = {
    "conversion_cycle": 1,
    "raman_crosstalk": 2,
    "pump_detect_crosstalk_0": 3,
    "pump_detect_crosstalk_1": 4,
    "sympathetic_cooling": 5,
    "global_cooling": 6,
    "rb_s_qubit": 7,
    "rb_f_qubit": 8,
    "thermometry": 9,
}


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return a Philox generator for (seed, *key), independent across keys."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must fit in 64 bits")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
