# packages/core/phumobcal_core/shared/seeding.py
from __future__ import annotations

import hashlib
import json
from enum import IntEnum
from typing import Any

import numpy as np


class SeedStream(IntEnum):
    """
    Fixed stream identifiers. Each pipeline stage draws from its own child of the
    master seed so that changing one stage never shifts another stage's randomness.
    """

    SAMPLING = 1
    SPLITS = 2
    AUTOENCODER = 3
    HEAD = 4
    COHORT = 5
    NOISE = 6


def derive_seed(master_seed: int, stream: SeedStream | int, *extra: int) -> int:
    """Return a 64-bit child seed of `master_seed` for `stream` (plus optional sub-keys)."""
    seq = np.random.SeedSequence([int(master_seed), int(stream), *(int(e) for e in extra)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(master_seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)]))


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest_of(payload: Any) -> str:
    """SHA-256 of the canonical JSON encoding of `payload`."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
