"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; every
function here is pure and returns fresh arrays.  Tensor factors are ordered
left to right, so ``kron(a, b)`` places ``a`` on factor 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError

MAX_DIM = 4096

HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a square complex128 array or raise DimensionError."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def hermitian_residual(m: np.ndarray) -> float:
    """Largest elementwise deviation ``max |M - M^dagger|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_residual(m) <= tol


def require_hermitian(m, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    res = hermitian_residual(a)
    if res > tol:
        raise ContractError(f"{name} is not Hermitian (residual {res:.3g} > {tol:g})", "hermitian")
    return a


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    u = np.asarray(u)
    return bool(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]), "fro") <= tol)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def jordan(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetrized product (ab + ba)/2."""
    return 0.5 * (a @ b + b @ a)


def kron(a, b, *, max_dim: int = MAX_DIM) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("kron expects two matrices")
    out_rows = a.shape[0] * b.shape[0]
    out_cols = a.shape[1] * b.shape[1]
    if max(out_rows, out_cols) > max_dim:
        raise DimensionError(f"kron result dimension {out_rows} exceeds max_dim={max_dim}")
    return np.kron(a, b)


def kron_all(factors: Iterable, *, max_dim: int = MAX_DIM) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = kron(out, f, max_dim=max_dim)
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise DimensionError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"product of dims {dims} != matrix dimension {m.shape[0]}")
    return dims


def _check_subsystems(idx: Iterable[int], n: int) -> tuple[int, ...]:
    idx = tuple(sorted(set(int(i) for i in idx)))
    if any(i < 0 or i >= n for i in idx):
        raise DimensionError(f"subsystem indices {idx} out of range for {n} factors")
    return idx


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    The kept factors stay in their original relative order.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    keep = _check_subsystems(keep, len(dims))
    n = len(dims)
    t = m.reshape(dims + dims)
    # einsum labels: row indices 0..n-1, column indices n..2n-1; traced pairs share a label
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out_labels = [i for i in keep] + [i + n for i in keep]
    res = np.einsum(t, row + col, out_labels)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.asarray(res).reshape(dk, dk)


def partial_transpose(m, dims: Sequence[int], sys: Iterable[int]) -> np.ndarray:
    """Transpose the tensor factors listed in ``sys``."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    sys = _check_subsystems(sys, len(dims))
    n = len(dims)
    t = m.reshape(dims + dims)
    perm = list(range(2 * n))
    for i in sys:
        perm[i], perm[i + n] = i + n, i
    return t.transpose(perm).reshape(m.shape)


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues in descending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ dagger(u)


def herm_eig(m, tol: float = HERMITIAN_TOL) -> HermitianSpectrum:
    a = require_hermitian(m, tol)
    a = 0.5 * (a + dagger(a))
    w, v = np.linalg.eigh(a)
    return HermitianSpectrum(w[::-1].copy(), v[:, ::-1].copy())


def eigvalsh_desc(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = require_hermitian(m, tol)
    return np.linalg.eigvalsh(0.5 * (a + dagger(a)))[::-1]


def herm_exp(h, scale: complex = 1.0, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``exp(scale * h)`` for Hermitian ``h`` via its spectral decomposition."""
    spec = herm_eig(h, tol)
    u = spec.eigenvectors
    return (u * np.exp(complex(scale) * spec.eigenvalues)) @ dagger(u)


def op_norm(m) -> float:
    """Operator (spectral) norm; max |eigenvalue| for Hermitian input."""
    a = as_matrix(m)
    if is_hermitian(a):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (a + dagger(a))))))
    return float(np.linalg.norm(a, 2))


def trace_norm(m) -> float:
    a = as_matrix(m)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def matrix_sign(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Hermitian involution sign(M); zero eigenvalues are mapped to +1."""
    spec = herm_eig(m, tol)
    s = np.where(spec.eigenvalues >= 0, 1.0, -1.0)
    u = spec.eigenvectors
    return (u * s) @ dagger(u)


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def is_density_matrix(rho, tol: float = 1e-10) -> bool:
    try:
        require_density(rho, tol)
    except (ContractError, DimensionError):
        return False
    return True


def require_density(rho, tol: float = 1e-10, name: str = "rho") -> np.ndarray:
    r = require_hermitian(rho, tol, name)
    tr = np.trace(r)
    if abs(tr - 1.0) > tol:
        raise ContractError(f"{name} trace is {tr.real:.12g}, expected 1", "unit trace")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (r + dagger(r)))))
    if lo < -tol:
        raise ContractError(f"{name} has negative eigenvalue {lo:.3g}", "positive semidefinite")
    return r


def null_space(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``a``.

    Singular values below ``rtol * max(1, s_max)`` count as zero, so an
    all-zero map yields the full space.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    cutoff = rtol * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return dagger(vh[rank:])


def orthonormalize(vectors: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) for the span of the given columns."""
    v = np.asarray(vectors, dtype=complex)
    if v.size == 0:
        return v.reshape(v.shape[0] if v.ndim == 2 else 0, 0)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    cutoff = rtol * max(1.0, float(s[0]))
    return u[:, s > cutoff]


def principal_angles(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Principal angles (radians, ascending) between spans of orthonormal columns."""
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        return np.zeros(0)
    k = min(q1.shape[1], q2.shape[1])
    overlap = dagger(q1) @ q2
    cos = np.sort(np.linalg.svd(overlap, compute_uv=False))[::-1][:k]
    # arccos is inaccurate near 0; small angles come from the residual's sines
    resid = q2 - q1 @ overlap if q2.shape[1] <= q1.shape[1] else q1 - q2 @ dagger(overlap)
    sin = np.sort(np.linalg.svd(resid, compute_uv=False))[:k]
    if sin.size < k:
        sin = np.concatenate([np.zeros(k - sin.size), sin])
    ang = np.where(cos**2 >= 0.5, np.arcsin(np.clip(sin, 0.0, 1.0)), np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.sort(ang)


def same_subspace(q1: np.ndarray, q2: np.ndarray, tol: float = 1e-8) -> bool:
    if q1.shape[1] != q2.shape[1]:
        return False
    ang = principal_angles(q1, q2)
    return bool(ang.size == 0 or np.max(ang) <= tol)
