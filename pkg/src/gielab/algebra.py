"""Finite-dimensional *-algebra diagnostics.

Subspaces of matrices are represented by Frobenius-orthonormal bases; a
basis of k matrices of size n is stored as a (k, n, n) array.  Vectorization
is row-major, so ``vec(X G) = (I (x) G^T) vec(X)`` and ``vec(G X) = (G (x) I) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, DimensionError
from .qmat import (
    as_matrix,
    commutator,
    dagger,
    herm_eig,
    null_space,
    orthonormalize,
    principal_angles,
    require_density,
)

SUBSPACE_TOL = 1e-8
NULL_RTOL = 1e-9


def _basis_array(mats, n: int) -> np.ndarray:
    arr = np.asarray(mats, dtype=complex)
    if arr.size == 0:
        return np.zeros((0, n, n), dtype=complex)
    return arr.reshape(-1, n, n)


@dataclass(frozen=True)
class AlgebraSpec:
    """Generators of a *-algebra on C^ambient_dim, optionally with a closed basis."""

    ambient_dim: int
    generators: np.ndarray
    closed_basis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        n = int(self.ambient_dim)
        if n < 1:
            raise DimensionError("ambient_dim must be positive")
        gens = [as_matrix(g, "generator") for g in self.generators]
        for g in gens:
            if g.shape != (n, n):
                raise DimensionError(f"generator shape {g.shape} != ({n}, {n})")
        object.__setattr__(self, "ambient_dim", n)
        object.__setattr__(self, "generators", _basis_array(gens, n))
        if self.closed_basis is not None:
            b = _basis_array(self.closed_basis, n)
            object.__setattr__(self, "closed_basis", b)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "AlgebraSpec":
        b = np.asarray(basis, dtype=complex)
        return cls(b.shape[-1], b, b)

    @property
    def dimension(self) -> int:
        if self.closed_basis is None:
            raise ContractError("algebra has no closed basis; call generated_algebra first", "closed basis")
        return self.closed_basis.shape[0]

    def require_closed(self) -> np.ndarray:
        if self.closed_basis is None:
            raise ContractError("algebra has no closed basis; call generated_algebra first", "closed basis")
        return self.closed_basis

    def basis_columns(self) -> np.ndarray:
        """Closed basis as orthonormal columns of an (n^2, k) matrix."""
        b = self.require_closed()
        return b.reshape(b.shape[0], -1).T

    def projector(self) -> np.ndarray:
        q = self.basis_columns()
        return q @ dagger(q)

    def membership_residual(self, x) -> float:
        x = as_matrix(x)
        q = self.basis_columns()
        v = x.reshape(-1)
        return float(np.linalg.norm(v - q @ (dagger(q) @ v)))

    def random_element(self, rng: np.random.Generator, hermitian: bool = True) -> np.ndarray:
        b = self.require_closed()
        c = rng.standard_normal(b.shape[0]) + 1j * rng.standard_normal(b.shape[0])
        x = np.tensordot(c, b, axes=1)
        return 0.5 * (x + dagger(x)) if hermitian else x


def _matrices_from_columns(q: np.ndarray, n: int) -> np.ndarray:
    return q.T.reshape(-1, n, n)


def commutant(a: AlgebraSpec, rtol: float = NULL_RTOL) -> AlgebraSpec:
    """Orthonormal basis of {X : [X, G] = [X, G^dagger] = 0 for all generators G}.

    Adjoints are included so the result is the commutant of the generated
    *-algebra.  Uses the closed basis instead of the generators when present.
    """
    n = a.ambient_dim
    gens = a.closed_basis if a.closed_basis is not None else a.generators
    eye = np.eye(n)
    blocks = []
    for g in gens:
        for h in (g, dagger(g)):
            blocks.append(np.kron(eye, h.T) - np.kron(h, eye))
    if not blocks:
        q = np.eye(n * n, dtype=complex)
    else:
        q = null_space(np.vstack(blocks), rtol)
    basis = _matrices_from_columns(q, n)
    return AlgebraSpec(n, basis, basis)


def generated_algebra(a: AlgebraSpec) -> AlgebraSpec:
    """Von Neumann algebra generated by the generators, as the double commutant."""
    inner = AlgebraSpec(a.ambient_dim, a.generators)
    dc = commutant(commutant(inner))
    return AlgebraSpec(a.ambient_dim, a.generators, dc.closed_basis)


def algebrize(generators: Sequence, ambient_dim: int | None = None) -> AlgebraSpec:
    gens = [as_matrix(g) for g in generators]
    n = gens[0].shape[0] if ambient_dim is None else ambient_dim
    return generated_algebra(AlgebraSpec(n, gens))


def word_closure(a: AlgebraSpec, max_length: int | None = None, rtol: float = 1e-9) -> np.ndarray:
    """Span of I and all words in generators and adjoints, as orthonormal columns.

    Grows words one letter at a time until the span stops growing or words
    reach ``max_length`` (default 2 n^2).
    """
    n = a.ambient_dim
    letters = []
    for g in a.generators:
        letters.append(g)
        letters.append(dagger(g))
    max_length = 2 * n * n if max_length is None else max_length
    q = orthonormalize(np.eye(n, dtype=complex).reshape(-1, 1), rtol)
    frontier = [np.eye(n, dtype=complex)]
    for _ in range(max_length):
        new = [w @ x for w in frontier for x in letters]
        if not new:
            break
        cand = np.column_stack([q] + [m.reshape(-1, 1) for m in new])
        q_new = orthonormalize(cand, rtol)
        if q_new.shape[1] == q.shape[1]:
            break
        # keep a spanning set of the new words only, to bound the frontier
        frontier = list(_matrices_from_columns(q_new, n))
        q = q_new
    return q


def same_span(q1: np.ndarray, q2: np.ndarray, tol: float = SUBSPACE_TOL) -> tuple[bool, float]:
    """(equal?, largest principal angle) for two orthonormal column bases."""
    if q1.shape[1] != q2.shape[1]:
        return False, float(np.pi / 2)
    ang = principal_angles(q1, q2)
    worst = float(np.max(ang)) if ang.size else 0.0
    return worst <= tol, worst


def center(a: AlgebraSpec, rtol: float = NULL_RTOL) -> np.ndarray:
    """Basis of A cap A' as (k, n, n); A must carry a closed basis."""
    n = a.ambient_dim
    qa = a.basis_columns()
    qc = commutant(a, rtol).basis_columns()
    eye = np.eye(n * n)
    stacked = np.vstack([eye - qa @ dagger(qa), eye - qc @ dagger(qc)])
    z = null_space(stacked, 1e-7)
    return _matrices_from_columns(z, n)


def center_and_factor(a: AlgebraSpec) -> tuple[np.ndarray, bool]:
    z = center(a)
    return z, z.shape[0] == 1


def commute_check(a1: AlgebraSpec, a2: AlgebraSpec, tol: float = 1e-10) -> tuple[bool, float]:
    """Largest ||[G, H]||_F over generator pairs (closed bases when present)."""
    if a1.ambient_dim != a2.ambient_dim:
        raise DimensionError(f"ambient dims differ: {a1.ambient_dim} vs {a2.ambient_dim}")
    g1 = a1.closed_basis if a1.closed_basis is not None else a1.generators
    g2 = a2.closed_basis if a2.closed_basis is not None else a2.generators
    worst = 0.0
    for g in g1:
        for h in g2:
            worst = max(worst, float(np.linalg.norm(commutator(g, h), "fro")))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# projections

def _require_projection(e, name: str, tol: float = 1e-10) -> np.ndarray:
    e = as_matrix(e, name)
    if np.max(np.abs(e - dagger(e))) > tol or np.max(np.abs(e @ e - e)) > tol:
        raise ContractError(f"{name} is not an orthogonal projection", "orthogonal projection")
    return e


def projection_meet(e, f, tol: float = 1e-8) -> np.ndarray:
    """Projection onto range(e) cap range(f): the eigenvalue-1 space of (e + f)/2."""
    e = _require_projection(e, "e")
    f = _require_projection(f, "f")
    spec = herm_eig(0.5 * (e + f))
    vecs = spec.eigenvectors[:, spec.eigenvalues >= 1.0 - tol]
    if vecs.shape[1] == 0:
        return np.zeros_like(e)
    p = vecs @ dagger(vecs)
    return 0.5 * (p + dagger(p))


def spectral_projections(h: np.ndarray, tol: float = 1e-8) -> list[np.ndarray]:
    """Spectral projections of a Hermitian matrix, grouping eigenvalues within ``tol``."""
    spec = herm_eig(h)
    w, u = spec.eigenvalues, spec.eigenvectors
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if abs(w[i] - w[groups[-1][-1]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        v = u[:, g]
        p = v @ dagger(v)
        out.append(0.5 * (p + dagger(p)))
    return out


def random_projection(a: AlgebraSpec, rng: np.random.Generator) -> np.ndarray:
    """Sum of a random nonempty subset of spectral projections of a random element."""
    projs = spectral_projections(a.random_element(rng))
    pick = rng.random(len(projs)) < 0.5
    if not pick.any():
        pick[rng.integers(len(projs))] = True
    return sum(p for p, k in zip(projs, pick) if k)


def correlation_deviation(rho: np.ndarray, e: np.ndarray, f: np.ndarray) -> float:
    """|tr(rho E^F) - tr(rho E) tr(rho F)|."""
    meet = projection_meet(e, f)
    return float(abs(np.trace(rho @ meet) - np.trace(rho @ e) * np.trace(rho @ f)))


def uncorrelated_check(rho, a1: AlgebraSpec, a2: AlgebraSpec, samples: int = 200,
                       seed: int = 0, tol: float = 1e-8) -> tuple[bool, float]:
    """Sample projection pairs E in a1, F in a2 and test phi(E^F) = phi(E) phi(F)."""
    rho = require_density(rho)
    a1.require_closed()
    a2.require_closed()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xA16E]))
    worst = 0.0
    for _ in range(samples):
        e = random_projection(a1, rng)
        f = random_projection(a2, rng)
        worst = max(worst, correlation_deviation(rho, e, f))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# standard constructions

def full_matrix_algebra(n: int) -> AlgebraSpec:
    basis = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            basis[i * n + j, i, j] = 1.0
    return AlgebraSpec(n, basis, basis)


def factor_embedding(dims: Sequence[int], factors: Sequence[int]) -> AlgebraSpec:
    """B(H_f) for the listed tensor factors, identity elsewhere."""
    dims = tuple(int(d) for d in dims)
    factors = sorted(set(int(f) for f in factors))
    n = int(np.prod(dims))
    dsub = int(np.prod([dims[f] for f in factors])) if factors else 1
    basis = []
    for i in range(dsub):
        for j in range(dsub):
            unit = np.zeros((dsub, dsub), dtype=complex)
            unit[i, j] = 1.0
            basis.append(_embed(unit, dims, factors))
    basis = np.array(basis) / np.sqrt(n // dsub)
    return AlgebraSpec(n, basis, basis)


def _embed(op: np.ndarray, dims: tuple[int, ...], factors: Sequence[int]) -> np.ndarray:
    """Place ``op`` (acting on the listed factors, in order) into the full space."""
    n = int(np.prod(dims))
    rest = [i for i in range(len(dims)) if i not in factors]
    drest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(drest))
    # full currently acts on (factors..., rest...); permute back to natural order
    order = list(factors) + rest
    k = len(dims)
    shape = [dims[i] for i in order]
    t = full.reshape(shape + shape)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [k + i for i in inv])
    return t.reshape(n, n)


def conjugate_algebra(a: AlgebraSpec, u: np.ndarray) -> AlgebraSpec:
    """U A U^dagger (basis stays orthonormal since conjugation is Frobenius-unitary)."""
    u = as_matrix(u)
    gens = np.array([u @ g @ dagger(u) for g in a.generators])
    basis = None
    if a.closed_basis is not None:
        basis = np.array([u @ b @ dagger(u) for b in a.closed_basis])
    return AlgebraSpec(a.ambient_dim, gens, basis)
