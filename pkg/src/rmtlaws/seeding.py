"""Reproducible seed streams for replicated Monte Carlo runs.

Every replicate draws from its own generator whose seed is a splitmix64 mix of
``(master_seed, replicate_index, stream_tag)``. Replicates can therefore run in
any order, or in separate processes, and still produce identical numbers.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function (Steele, Lea & Flood)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _tag_value(tag: str | int) -> int:
    if isinstance(tag, int):
        return tag & MASK64
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, replicate: int = 0, stream: str | int = 0) -> int:
    """Mix a master seed, a replicate index and a stream tag into a 64-bit seed."""
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (replicate & MASK64))
    h = splitmix64(h ^ _tag_value(stream))
    return h


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def polar_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws by Marsaglia's polar method.

    Uniform pairs are drawn in batches; the accepted pairs are consumed in
    order, so the output depends only on the generator state and ``size``.
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(shape, dtype=np.int64))
    out = np.empty(total)
    filled = 0
    while filled < total:
        need = total - filled
        pairs = int(need / (2 * 0.785)) + 16
        u = rng.uniform(-1.0, 1.0, size=(pairs, 2))
        s = u[:, 0] ** 2 + u[:, 1] ** 2
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        z = (u * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
        take = min(z.size, need)
        out[filled:filled + take] = z[:take]
        filled += take
    return out.reshape(shape)
