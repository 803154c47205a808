"""Keyed seed derivation and counter-based uniform streams.

A stream is identified by a 64-bit key.  Draw number ``k`` of the stream is
a pure function of ``(key, k)``: numpy's Philox4x64 counter-based generator
is keyed with ``key`` and its 256-bit counter indexes the draw, so any cell
can be regenerated without replaying the stream.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Generator, Philox

MASK64 = (1 << 64) - 1
_TWO52 = 2.0**52


def seed_derive(master_seed: int, stream_label: str) -> int:
    """Derive a 64-bit stream key from ``master_seed`` and a text label.

    The key is the 8-byte BLAKE2b digest of the UTF-8 label, keyed with the
    little-endian 8-byte encoding of ``master_seed mod 2**64``.  The
    algorithm is fixed; keys are stable across versions.
    """
    if not isinstance(master_seed, (int, np.integer)):
        raise TypeError(f"master_seed must be an integer, got {type(master_seed).__name__}")
    key = (int(master_seed) & MASK64).to_bytes(8, "little")
    digest = hashlib.blake2b(stream_label.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def uniforms(key: int, size: int, start: int = 0) -> np.ndarray:
    """Draws ``start .. start+size-1`` of stream ``key`` as floats in (0, 1).

    The top 52 bits k of each draw map to the midpoint (k + 1/2) * 2**-52,
    which is exact in double precision and never 0 or 1.
    """
    skip = start % 4
    g = Generator(Philox(key=key, counter=start // 4))
    r = g.random(skip + size)[skip:]
    return (np.floor(r * _TWO52) + 0.5) / _TWO52


def normals(key: int, size: int) -> np.ndarray:
    """Standard normal draws from stream ``key`` (sequential, not cell-keyed)."""
    return Generator(Philox(key=key)).standard_normal(size)
