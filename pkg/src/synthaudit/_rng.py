"""Seed derivation.

Every random stream is a Philox (counter-based) generator keyed by the run
seed plus a path of integer or string keys, so sub-streams never collide and
a single top-level seed reproduces an entire run.
"""

import zlib

import numpy as np


def _key(k):
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k)


def derive_seed(seed, *keys):
    """Deterministic 32-bit sub-seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed)] + [_key(k) for k in keys])
    return int(ss.generate_state(1)[0])


def make_rng(seed, *keys):
    ss = np.random.SeedSequence([int(seed)] + [_key(k) for k in keys])
    return np.random.Generator(np.random.Philox(ss))
