"""Seeded random operators and states for property checks and tests.

Streams are counter-based (Philox) and keyed by (seed, stream) so that
results never depend on execution order or thread count.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT, ToleranceConfig
from .operators import DensityOperator, HermitianOperator, density, hermitian


def rng_from_seed(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), stream & (2**64 - 1)]))


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> HermitianOperator:
    a = random_complex(rng, (dim, dim))
    return hermitian(scale * (a + a.conj().T) / 2.0)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(random_complex(rng, (dim, dim)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_density(
    rng: np.random.Generator,
    dim: int,
    rank: int | None = None,
    trace: float = 1.0,
    cfg: ToleranceConfig = DEFAULT,
) -> DensityOperator:
    """Ginibre-induced random state of the given rank and trace."""
    rank = dim if rank is None else rank
    g = random_complex(rng, (dim, rank))
    mat = g @ g.conj().T
    mat *= trace / np.trace(mat).real
    return density(mat, cfg)


def random_pure(rng: np.random.Generator, dim: int, cfg: ToleranceConfig = DEFAULT) -> DensityOperator:
    return random_density(rng, dim, rank=1, cfg=cfg)


def random_traceless(rng: np.random.Generator, dim: int) -> HermitianOperator:
    h = random_hermitian(rng, dim).matrix.copy()
    h -= np.trace(h).real / dim * np.eye(dim)
    return hermitian(h)
