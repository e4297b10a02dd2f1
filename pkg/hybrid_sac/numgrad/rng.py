"""Seeded random streams.

All stochasticity goes through numpy's counter-based Philox generator. A
stream is identified by the run seed plus a tuple of names; names are hashed
with CRC32 rather than ``hash()`` so derivation does not depend on the
interpreter's hash randomization.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def make_rng(seed: int, *stream: int | str) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))


def stream_seed(seed: int, *stream: int | str) -> int:
    """A 63-bit integer seed for code that wants a plain int."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(s) for s in stream))
    return int(sequence.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))
