"""Deterministic RNG derivation.

All randomness in the workbench flows from a single integer seed. Independent
streams are derived by hashing a tuple of string/int labels into extra
entropy words for ``numpy.random.SeedSequence``, so e.g. the stream for
(seed, "dataset", "BPSK", 10) never collides with (seed, "init", "CNN1").
"""

import hashlib

import numpy as np


def _label_words(labels) -> list[int]:
    h = hashlib.sha256()
    for label in labels:
        h.update(repr(label).encode("utf-8"))
        h.update(b"\x1f")
    digest = h.digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def seed_sequence(seed: int, *labels) -> np.random.SeedSequence:
    """SeedSequence for the stream named by ``labels`` under the root seed."""
    return np.random.SeedSequence([seed & 0xFFFFFFFF, *_label_words(labels)])


def derive_rng(seed: int, *labels) -> np.random.Generator:
    """Generator for the stream named by ``labels`` under the root seed."""
    return np.random.default_rng(seed_sequence(seed, *labels))
