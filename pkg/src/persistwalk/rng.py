"""Counter-based random numbers shared by both kernel backends.

Replicate ``r`` of stream ``name`` under ``seed`` gets the 64-bit key
``rep_key = mix64(stream_key + (r + 1) * GAMMA_REP)`` and its ``k``-th
uniform is ``u_k = ((mix64(rep_key + k * GAMMA_STEP) >> 11) + 0.5) / 2**53``.
Uniforms live in (0, 1) strictly, so ``log(u)`` is always finite.

Because every draw is a pure function of (seed, stream, replicate, step),
any partition of the replicates over workers reproduces the same numbers.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK = (1 << 64) - 1
GAMMA_REP = 0x9E3779B97F4A7C15
GAMMA_STEP = 0xD1B54A32D192ED03
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """splitmix64 finaliser on Python ints."""
    z &= MASK
    z = ((z ^ (z >> 30)) * M1) & MASK
    z = ((z ^ (z >> 27)) * M2) & MASK
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: str) -> int:
    if seed is None:
        raise ValueError("a seed is required")
    h = int.from_bytes(hashlib.blake2b(stream.encode(), digest_size=8).digest(), "little")
    return mix64(mix64(int(seed) & MASK) ^ h)


def rep_keys(skey: int, start: int, stop: int) -> np.ndarray:
    r = np.arange(start, stop, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return mix64_array(np.uint64(skey) + r * np.uint64(GAMMA_REP))


def uniforms(keys: np.ndarray, k) -> np.ndarray:
    """u_k for every key (k a scalar or an array broadcastable to keys)."""
    with np.errstate(over="ignore"):
        z = mix64_array(keys + np.asarray(k, dtype=np.uint64) * np.uint64(GAMMA_STEP))
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * INV_2_53


def numpy_generator(seed: int, stream: str, chunk: int = 0) -> np.random.Generator:
    """Block generator for vectorised samplers (excursions), keyed like the kernels."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([stream_key(seed, stream), chunk])))
