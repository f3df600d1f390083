"""CHSH operators with and without commensurability.

The symmetrized operator replaces each product A_i B_j by the Jordan
product, which keeps it Hermitian when the two sides do not commute.  Its
bound 2 sqrt(2) follows from an exact identity expressing it as a multiple
of the sum of squares of the four observables minus a positive combination
of four squares F_k^2.  ``sos_residual`` evaluates that identity
numerically; ``seesaw_maximize`` searches for large values from below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .qmat import (
    HERMITIAN_TOL,
    commutator,
    dagger,
    herm_eig,
    is_hermitian,
    jordan,
    kron,
    matrix_sign,
    require_hermitian,
)
from .sampling import random_hermitian, random_involution, random_ket

SQRT2 = math.sqrt(2.0)
TSIRELSON = 2.0 * SQRT2


@dataclass(frozen=True)
class ChshTuple:
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    involution: bool = False

    def __post_init__(self):
        mats = [require_hermitian(getattr(self, n), HERMITIAN_TOL, n) for n in ("a1", "a2", "b1", "b2")]
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise DimensionError(f"CHSH observables have mismatched shapes {sorted(shapes)}")
        for name, m in zip(("a1", "a2", "b1", "b2"), mats):
            object.__setattr__(self, name, m)
        if self.involution:
            eye = np.eye(self.dim)
            for name, m in zip(("a1", "a2", "b1", "b2"), mats):
                if np.linalg.norm(m @ m - eye, "fro") > 1e-9:
                    raise DimensionError(f"{name} is flagged as an involution but X^2 != I")

    @property
    def dim(self) -> int:
        return self.a1.shape[0]

    @property
    def observables(self) -> tuple[np.ndarray, ...]:
        return (self.a1, self.a2, self.b1, self.b2)

    def max_cross_commutator(self) -> float:
        """Largest ||[A_i, B_j]||_F."""
        return max(float(np.linalg.norm(commutator(a, b), "fro"))
                   for a in (self.a1, self.a2) for b in (self.b1, self.b2))

    def commuting(self, tol: float = 1e-12) -> bool:
        return self.max_cross_commutator() <= tol


@dataclass(frozen=True)
class ChshOperator:
    matrix: np.ndarray
    ordering: str
    hermitian: bool
    commuting: bool


@dataclass(frozen=True)
class SosCertificate:
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray

    @property
    def squares(self) -> tuple[np.ndarray, ...]:
        return (self.f1, self.f2, self.f3, self.f4)


def chsh_operator(t: ChshTuple, ordering: str = "AB") -> ChshOperator:
    """E = A1B1 + A1B2 + A2B1 - A2B2, or the reversed products B_jA_i for "BA"."""
    a1, a2, b1, b2 = t.observables
    if ordering == "AB":
        e = a1 @ b1 + a1 @ b2 + a2 @ b1 - a2 @ b2
    elif ordering == "BA":
        e = b1 @ a1 + b2 @ a1 + b1 @ a2 - b2 @ a2
    else:
        raise ValueError(f"ordering must be 'AB' or 'BA', got {ordering!r}")
    return ChshOperator(e, ordering, is_hermitian(e), t.commuting())


def symmetrized_chsh(t: ChshTuple) -> np.ndarray:
    a1, a2, b1, b2 = t.observables
    e = jordan(a1, b1) + jordan(a1, b2) + jordan(a2, b1) - jordan(a2, b2)
    return 0.5 * (e + dagger(e))


def sos_certificate(t: ChshTuple) -> SosCertificate:
    a1, a2, b1, b2 = t.observables
    s = SQRT2 + 1.0
    return SosCertificate(
        s * (a1 - b1) + a2 - b2,
        s * (a1 - b2) - a2 - b1,
        s * (a2 - b1) + a1 + b2,
        s * (a2 + b2) - a1 - b1,
    )


def sos_decomposition(t: ChshTuple) -> np.ndarray:
    """Right-hand side (1/sqrt2) sum X^2 - ((sqrt2 - 1)/8) sum F_k^2."""
    cert = sos_certificate(t)
    squares = sum(x @ x for x in t.observables)
    fsq = sum(f @ f for f in cert.squares)
    return squares / SQRT2 - (SQRT2 - 1.0) / 8.0 * fsq


def sos_residual(t: ChshTuple) -> float:
    """Frobenius norm of E_sym minus its sum-of-squares form."""
    return float(np.linalg.norm(symmetrized_chsh(t) - sos_decomposition(t), "fro"))


def max_eigenvalue(m: np.ndarray) -> float:
    return float(herm_eig(m).eigenvalues[0])


# ---------------------------------------------------------------------------
# random tuples

def random_hermitian_tuple(rng: np.random.Generator, dim: int) -> ChshTuple:
    return ChshTuple(*(random_hermitian(rng, dim) for _ in range(4)))


def random_involution_tuple(rng: np.random.Generator, dim: int) -> ChshTuple:
    return ChshTuple(*(random_involution(rng, dim) for _ in range(4)), involution=True)


def tensor_tuple(a1, a2, b1, b2) -> ChshTuple:
    """Embed local observables as A_i (x) I and I (x) B_j."""
    da, db = np.asarray(a1).shape[0], np.asarray(b1).shape[0]
    ia, ib = np.eye(da), np.eye(db)
    x2 = all(np.allclose(x @ x, np.eye(x.shape[0]), atol=1e-9) for x in map(np.asarray, (a1, a2, b1, b2)))
    return ChshTuple(kron(a1, ib), kron(a2, ib), kron(ia, b1), kron(ia, b2), involution=x2)


def singlet_settings() -> ChshTuple:
    """Optimal qubit settings: A = Z, X and B = (Z +- X)/sqrt2."""
    z = np.diag([1.0, -1.0]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return tensor_tuple(z, x, (z + x) / SQRT2, (z - x) / SQRT2)


# ---------------------------------------------------------------------------
# see-saw

class SeesawTarget(str, enum.Enum):
    E_TENSOR = "E_tensor"
    E_SYM = "E_sym"


@dataclass
class SeesawResult:
    value: float
    tuple: ChshTuple
    state: np.ndarray
    converged: bool
    rounds: int
    history: list[float] = field(default_factory=list)
    restart_values: list[float] = field(default_factory=list)


def _objective_operator(obs: list[np.ndarray], target: SeesawTarget, local_dim: int) -> np.ndarray:
    a1, a2, b1, b2 = obs
    if target is SeesawTarget.E_TENSOR:
        eye = np.eye(local_dim)
        a1, a2 = kron(a1, eye), kron(a2, eye)
        b1, b2 = kron(eye, b1), kron(eye, b2)
    t = ChshTuple(a1, a2, b1, b2)
    return symmetrized_chsh(t)


def _effective_matrix(obs: list[np.ndarray], which: int, rho: np.ndarray,
                      target: SeesawTarget, local_dim: int) -> np.ndarray:
    """Hermitian M with <E> = tr(X M) + const in the observable ``which``."""
    a1, a2, b1, b2 = obs
    # partner combination multiplying the updated observable
    partner = {0: (b1, b2, 1.0, 1.0), 1: (b1, b2, 1.0, -1.0),
               2: (a1, a2, 1.0, 1.0), 3: (a1, a2, 1.0, -1.0)}[which]
    p, q, cp, cq = partner
    s = cp * p + cq * q
    if target is SeesawTarget.E_TENSOR:
        d = local_dim
        r = rho.reshape(d, d, d, d)  # r[i, j, k, l] = <ij|rho|kl>
        if which < 2:
            # tr[(X (x) S) rho] = tr[X M] with M[i, k] = sum_jl S[l, j] r[i, j, k, l]
            m = np.einsum("ijkl,lj->ik", r, s)
        else:
            m = np.einsum("ijkl,ki->jl", r, s)
    else:
        m = s @ rho
    return 0.5 * (m + dagger(m))


def _top_eigvec(h: np.ndarray) -> tuple[float, np.ndarray]:
    spec = herm_eig(h)
    return float(spec.eigenvalues[0]), spec.eigenvectors[:, 0]


def _expectation(h: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, h @ psi)))


def _seesaw_run(obs: list[np.ndarray], psi: np.ndarray, target: SeesawTarget, local_dim: int,
                max_rounds: int, tol: float) -> tuple[float, list[np.ndarray], np.ndarray, bool, int, list[float]]:
    value, psi = _top_eigvec(_objective_operator(obs, target, local_dim))
    history = [value]
    converged = False
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        rho = np.outer(psi, psi.conj())
        for which in range(4):
            m = _effective_matrix(obs, which, rho, target, local_dim)
            obs[which] = matrix_sign(m)
        new_value, psi = _top_eigvec(_objective_operator(obs, target, local_dim))
        # every block update is an exact maximization, so this never decreases
        # beyond rounding
        history.append(new_value)
        if abs(new_value - value) < tol:
            value = new_value
            converged = True
            break
        value = new_value
    return value, obs, psi, converged, rounds, history


def seesaw_maximize(dim: int, seed: int = 0, restarts: int = 20,
                    target: SeesawTarget | str = SeesawTarget.E_TENSOR,
                    max_rounds: int = 500, tol: float = 1e-10) -> SeesawResult:
    """Alternating maximization of <psi|E|psi> over involutions and the state.

    For ``E_tensor`` each side holds ``dim``-dimensional observables and the
    state lives on the ``dim**2`` product space; for ``E_sym`` all four act
    on one ``dim``-dimensional space.  Each observable update is sign(M) for
    the Hermitian M that the objective is linear in; the state update is the
    top eigenvector.  ``restarts=0`` runs only the identity initialization,
    which is a fixed point at the classical value 2.  Returns the best restart.
    """
    if dim < 2:
        raise DimensionError("see-saw needs dim >= 2")
    target = SeesawTarget(target)
    local = dim
    space = dim * dim if target is SeesawTarget.E_TENSOR else dim
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), 0x5EE5A]))

    starts = []
    if restarts == 0:
        starts.append(([np.eye(local, dtype=complex) for _ in range(4)], None))
    for _ in range(restarts):
        obs = [random_involution(rng, local) for _ in range(4)]
        starts.append((obs, random_ket(rng, space)))

    best = None
    values = []
    for obs, _psi in starts:
        value, obs, psi, conv, rounds, hist = _seesaw_run(list(obs), _psi, target, local, max_rounds, tol)
        values.append(value)
        if best is None or value > best[0]:
            best = (value, obs, psi, conv, rounds, hist)
    value, obs, psi, conv, rounds, hist = best
    if target is SeesawTarget.E_TENSOR:
        tup = tensor_tuple(*obs)
    else:
        tup = ChshTuple(*obs, involution=True)
    return SeesawResult(value, tup, psi, conv, rounds, hist, values)
