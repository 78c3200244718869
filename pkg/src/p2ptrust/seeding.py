"""Deterministic RNG stream derivation.

Every random decision in a run draws from a stream named by a tuple of labels
(e.g. ``("churn", 12)``) and derived from the master seed.  Derivation hashes
the labels, so streams are stable across platforms and Python versions and do
not depend on the order in which other streams were consumed.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def derive_seed(seed: int, *labels: object) -> int:
    text = "/".join([str(seed), *map(str, labels)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def py_rng(seed: int, *labels: object) -> random.Random:
    return random.Random(derive_seed(seed, *labels))


def np_rng(seed: int, *labels: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *labels))
