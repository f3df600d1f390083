"""Seeded random matrices and states.

All generators take a ``numpy.random.Generator``.  ``module_rng`` derives
independent streams from a master seed and a stable string tag, so adding
a new consumer never shifts another consumer's draws.
"""

from __future__ import annotations

import zlib

import numpy as np

from .qmat import dagger


def module_rng(seed: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), zlib.crc32(tag.encode("utf-8"))])
    return np.random.default_rng(ss)


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix (phase-fixed)."""
    z = ginibre(rng, dim)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    z = ginibre(rng, dim)
    return scale * 0.5 * (z + dagger(z))


def random_involution(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Hermitian X with X^2 = I; both eigenvalues occur when dim >= 2."""
    signs = rng.choice([-1.0, 1.0], size=dim)
    if dim >= 2:
        if np.all(signs > 0):
            signs[rng.integers(dim)] = -1.0
        elif np.all(signs < 0):
            signs[rng.integers(dim)] = 1.0
    u = random_unitary(rng, dim)
    x = (u * signs) @ dagger(u)
    return 0.5 * (x + dagger(x))


def random_ket(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_pure_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = random_ket(rng, dim)
    return np.outer(v, v.conj())


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Mixed state ``G G^dagger / tr`` from a dim x rank Ginibre matrix."""
    g = ginibre(rng, dim, dim if rank is None else rank)
    rho = g @ dagger(g)
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + dagger(rho))


def random_mixture(rng: np.random.Generator, dim: int, terms: int = 3) -> np.ndarray:
    """Random convex mixture of pure states."""
    w = rng.dirichlet(np.ones(terms))
    rho = sum(wi * random_pure_density(rng, dim) for wi in w)
    return 0.5 * (rho + dagger(rho))


def sample_states(rng: np.random.Generator, dim: int, count: int) -> list[np.ndarray]:
    """Half pure (Haar-like), half random convex mixtures, interleaved."""
    return [
        random_pure_density(rng, dim) if i % 2 == 0 else random_mixture(rng, dim)
        for i in range(count)
    ]


def random_kraus(rng: np.random.Generator, dim: int, n_ops: int = 2) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map (blocks of a random isometry)."""
    v = random_unitary(rng, dim * n_ops)[:, :dim]
    return [v[i * dim:(i + 1) * dim, :] for i in range(n_ops)]
