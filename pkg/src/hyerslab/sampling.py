"""Seeded random elements and tuples for the verification suites."""
from __future__ import annotations

import numpy as np

from .algebra import AlgebraContext, Kind, MatrixElement, PolyElement

POLY_DEGREES = np.array([1, 3, 5, 7], dtype=np.int64)


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``; PCG64 streams are platform-stable."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)])


def random_element(ctx: AlgebraContext, rng: np.random.Generator, norm: float | None = None):
    """Random element with complex entries. With ``norm`` set it is rescaled to that norm."""
    if ctx.kind is Kind.MATRIX:
        d = ctx.dim
        z = rng.uniform(-1.0, 1.0, (d, d)) + 1j * rng.uniform(-1.0, 1.0, (d, d))
        el = MatrixElement(z)
    else:
        k = int(rng.integers(1, len(POLY_DEGREES) + 1))
        degs = np.sort(rng.choice(POLY_DEGREES, size=k, replace=False))
        coefs = rng.uniform(-1.0, 1.0, k) + 1j * rng.uniform(-1.0, 1.0, k)
        el = PolyElement(dict(zip(degs.tolist(), coefs.tolist())))
    if norm is not None:
        n = ctx.norm(el)
        el = el * (norm / n) if n > 0 else el
    return el


def random_norm(rng: np.random.Generator, lo: float = 0.05, hi: float = 4.0) -> float:
    """Log-uniform norm in [lo, hi]."""
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_points(ctx: AlgebraContext, count: int, seed: int, stream: int = 1,
                  lo: float = 0.05, hi: float = 4.0) -> list:
    rng = rng_for(seed, stream)
    return [random_element(ctx, rng, random_norm(rng, lo, hi)) for _ in range(count)]


def sample_tuples(ctx: AlgebraContext, count: int, arity: int, seed: int, stream: int = 2,
                  lo: float = 0.05, hi: float = 4.0) -> list[tuple]:
    rng = rng_for(seed, stream)
    return [tuple(random_element(ctx, rng, random_norm(rng, lo, hi)) for _ in range(arity))
            for _ in range(count)]


def unit_scalars(rng: np.random.Generator, count: int) -> list[complex]:
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return [complex(np.cos(t), np.sin(t)) for t in theta]
