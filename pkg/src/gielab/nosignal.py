"""No-signalling tests: Lüders updates, local Kraus channels and witnesses.

Alice acts with operations built from ``a1``; Bob reads expectations of
``a2`` observables.  For commuting algebras every such operation leaves
Bob's statistics unchanged.  For noncommuting algebras some projective
measurement in ``a1`` changes them, unless Alice is restricted to a smaller
class of operations, which ``restricted_example`` demonstrates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraSpec,
    _embed,
    commute_check,
    conjugate_algebra,
    factor_embedding,
    generated_algebra,
    random_projection,
    spectral_projections,
)
from .errors import ContractError, DimensionError
from .qmat import as_matrix, dagger, herm_eig, kron, require_density
from .sampling import module_rng, random_hermitian, random_kraus, random_unitary, sample_states

PVM_TOL = 1e-9
KRAUS_TOL = 1e-9
NOSIGNAL_TOL = 1e-9
WITNESS_TOL = 1e-6


@dataclass(frozen=True)
class Pvm:
    projections: tuple[np.ndarray, ...]

    def __init__(self, projections: Sequence):
        projs = tuple(as_matrix(p, "projection") for p in projections)
        if not projs:
            raise ContractError("PVM needs at least one projection", "valid PVM")
        n = projs[0].shape[0]
        if any(p.shape != (n, n) for p in projs):
            raise DimensionError("PVM projections have mismatched shapes")
        for i, p in enumerate(projs):
            if np.max(np.abs(p - dagger(p))) > PVM_TOL or np.max(np.abs(p @ p - p)) > PVM_TOL:
                raise ContractError(f"projection {i} is not Hermitian idempotent", "valid PVM")
            for j in range(i):
                if np.max(np.abs(p @ projs[j])) > PVM_TOL:
                    raise ContractError(f"projections {j} and {i} are not orthogonal", "valid PVM")
        if np.max(np.abs(sum(projs) - np.eye(n))) > PVM_TOL:
            raise ContractError("projections do not sum to the identity", "valid PVM")
        object.__setattr__(self, "projections", projs)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def channel(self) -> "KrausChannel":
        return KrausChannel(self.projections)


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]

    def __init__(self, kraus_ops: Sequence):
        ops = tuple(as_matrix(k, "Kraus operator") for k in kraus_ops)
        if not ops:
            raise ContractError("channel needs at least one Kraus operator", "trace preserving")
        n = ops[0].shape[1]
        if any(k.shape != ops[0].shape for k in ops):
            raise DimensionError("Kraus operators have mismatched shapes")
        s = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(s - np.eye(n))) > KRAUS_TOL:
            raise ContractError("sum K^dagger K != I", "trace preserving")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = sum(k @ rho @ dagger(k) for k in self.kraus_ops)
        return 0.5 * (out + dagger(out))

    def dual(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg picture: sum K^dagger X K."""
        return sum(dagger(k) @ x @ k for k in self.kraus_ops)


def luders_update(rho, p: Pvm) -> np.ndarray:
    """Nonselective update sum_i P_i rho P_i."""
    rho = require_density(rho)
    if rho.shape[0] != p.dim:
        raise DimensionError(f"state dim {rho.shape[0]} != PVM dim {p.dim}")
    out = sum(q @ rho @ q for q in p.projections)
    return 0.5 * (out + dagger(out))


def is_local_kraus(ch: KrausChannel, a: AlgebraSpec, tol: float = KRAUS_TOL) -> tuple[bool, float]:
    worst = max(a.membership_residual(k) for k in ch.kraus_ops)
    return worst <= tol, worst


def hermitian_observables(a: AlgebraSpec) -> list[np.ndarray]:
    """Hermitian and anti-Hermitian parts of the generators, deduplicated to nonzero ones."""
    out = []
    for g in a.generators:
        for h in (0.5 * (g + dagger(g)), -0.5j * (g - dagger(g))):
            if np.linalg.norm(h) > 1e-12:
                out.append(h)
    return out


def pvm_from_element(h: np.ndarray, tol: float = 1e-8) -> Pvm:
    return Pvm(spectral_projections(h, tol))


def random_pvm(a: AlgebraSpec, rng: np.random.Generator) -> Pvm:
    return pvm_from_element(a.random_element(rng))


def random_local_channel(a: AlgebraSpec, rng: np.random.Generator, n_ops: int = 2) -> KrausChannel:
    """Channel with Kraus operators drawn from the algebra, normalized by S^{-1/2}.

    S = sum K^dagger K lies in the algebra, so the normalized operators do too.
    """
    ops = [a.random_element(rng, hermitian=False) for _ in range(n_ops)]
    s = sum(dagger(k) @ k for k in ops)
    spec = herm_eig(0.5 * (s + dagger(s)))
    inv_sqrt = (spec.eigenvectors / np.sqrt(spec.eigenvalues)) @ dagger(spec.eigenvectors)
    return KrausChannel([k @ inv_sqrt for k in ops])


def expectation_deviation(ch: KrausChannel, rho: np.ndarray, x: np.ndarray) -> float:
    return float(abs(np.trace(rho @ x) - np.trace(ch.apply(rho) @ x)))


def operational_nosignal_check(a1: AlgebraSpec, a2: AlgebraSpec, channels: Sequence[KrausChannel],
                               states: Sequence[np.ndarray], restricted: bool = False,
                               tol: float = NOSIGNAL_TOL) -> tuple[bool, float]:
    """Worst |tr(rho X) - tr(ch(rho) X)| over channels, states and a2 observables.

    Channels must be local to ``a1`` unless ``restricted`` marks them as a
    caller-vetted restricted class.
    """
    if a1.ambient_dim != a2.ambient_dim:
        raise DimensionError(f"ambient dims differ: {a1.ambient_dim} vs {a2.ambient_dim}")
    if not restricted:
        for i, ch in enumerate(channels):
            ok, res = is_local_kraus(ch, a1)
            if not ok:
                raise ContractError(f"channel {i} is not local to a1 (residual {res:.3g})",
                                    "Kraus operators in a1")
    obs = hermitian_observables(a2)
    worst = 0.0
    for ch in channels:
        # compare in the Heisenberg picture: one dual per observable, reused over states
        duals = [x - ch.dual(x) for x in obs]
        for rho in states:
            for d in duals:
                worst = max(worst, float(abs(np.trace(rho @ d))))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# commutativity versus signalling

class Verdict(str, enum.Enum):
    COMMUTING_VERIFIED = "COMMUTING_VERIFIED"
    SIGNALLING_WITNESS = "SIGNALLING_WITNESS"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Witness:
    state: np.ndarray
    pvm: Pvm
    projection: np.ndarray
    deviation: float
    trial: int


@dataclass
class VerdictRecord:
    verdict: Verdict
    commute_residual: float
    worst_deviation: float
    trials: int
    witness: Witness | None = field(default=None)

    def summary(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "commute_residual": self.commute_residual,
            "worst_deviation": self.worst_deviation,
            "trials": self.trials,
        }
        if self.witness is not None:
            out["witness_deviation"] = self.witness.deviation
            out["witness_trial"] = self.witness.trial
            out["witness_outcomes"] = len(self.witness.pvm.projections)
        return out


def macrocausality_equiv_test(a1: AlgebraSpec, a2: AlgebraSpec, budget: int = 64, seed: int = 0,
                              states_per_trial: int = 4) -> VerdictRecord:
    """Check invariance for commuting pairs, or search for a signalling witness.

    Each trial draws a PVM from spectral projections of a random Hermitian
    element of ``a1`` and a projection Q from ``a2``.  The largest change of
    tr(rho Q) over pure states is the top |eigenvalue| of Q - sum P Q P,
    attained on its eigenvector.  The witness reported is the largest over
    the budget (earliest trial on ties).
    """
    a1.require_closed()
    a2.require_closed()
    commuting, residual = commute_check(a1, a2)
    rng = module_rng(seed, "nosignal.macrocausality")
    n = a1.ambient_dim
    worst = 0.0
    best: Witness | None = None
    for trial in range(budget):
        pvm = random_pvm(a1, rng)
        q = random_projection(a2, rng)
        delta = q - sum(p @ q @ p for p in pvm.projections)
        delta = 0.5 * (delta + dagger(delta))
        if commuting:
            for rho in sample_states(rng, n, states_per_trial):
                worst = max(worst, float(abs(np.trace(rho @ delta))))
            continue
        spec = herm_eig(delta)
        idx = int(np.argmax(np.abs(spec.eigenvalues)))
        dev = float(abs(spec.eigenvalues[idx]))
        worst = max(worst, dev)
        if dev > WITNESS_TOL and (best is None or dev > best.deviation):
            v = spec.eigenvectors[:, idx]
            best = Witness(np.outer(v, v.conj()), pvm, q, dev, trial)
    if commuting:
        if worst > NOSIGNAL_TOL:
            raise ContractError(f"commuting algebras changed an a2 expectation by {worst:.3g}",
                                "commutativity implies no-signalling")
        return VerdictRecord(Verdict.COMMUTING_VERIFIED, residual, worst, budget)
    if best is None:
        return VerdictRecord(Verdict.INCONCLUSIVE, residual, worst, budget)
    return VerdictRecord(Verdict.SIGNALLING_WITNESS, residual, worst, budget, best)


# ---------------------------------------------------------------------------
# restricted operations with noncommuting algebras

_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
ENTANGLERS = ("cnot", "swap", "random", "identity")


def operator_schmidt_rank(u: np.ndarray, da: int, db: int, tol: float = 1e-10) -> int:
    """Rank of u across the (da | db) cut, via realignment."""
    r = u.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    s = np.linalg.svd(r, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def entangler_matrix(name: str | np.ndarray, dims: tuple[int, int], seed: int = 0) -> tuple[str, np.ndarray]:
    da, db = dims
    if not isinstance(name, str):
        u = as_matrix(name, "entangler")
        if u.shape != (da * db, da * db):
            raise DimensionError(f"entangler shape {u.shape} != {(da * db, da * db)}")
        if np.max(np.abs(dagger(u) @ u - np.eye(da * db))) > 1e-9:
            raise ContractError("entangler is not unitary", "unitary entangler")
        return "matrix", u
    key = name.lower()
    if key == "identity":
        return key, np.eye(da * db, dtype=complex)
    if key == "random":
        return key, random_unitary(module_rng(seed, "nosignal.entangler"), da * db)
    if key in ("cnot", "swap"):
        if (da, db) != (2, 2):
            raise DimensionError(f"{key} needs qubit factors, got dims {dims}")
        return key, (_CNOT if key == "cnot" else _SWAP).copy()
    raise ValueError(f"unknown entangler {name!r}; expected one of {ENTANGLERS} or a matrix")


@dataclass
class RestrictedReport:
    entangler: str
    dims: tuple[int, int, int]
    commute_residual: float
    noncommuting: bool
    restricted_deviation: float
    restricted_nosignal: bool
    degenerate: bool
    samples: int
    schmidt_rank: int

    @property
    def coexistence(self) -> bool:
        return self.noncommuting and self.restricted_nosignal

    def summary(self) -> dict:
        return {
            "entangler": self.entangler,
            "dims": list(self.dims),
            "commute_residual": self.commute_residual,
            "noncommuting": self.noncommuting,
            "restricted_deviation": self.restricted_deviation,
            "restricted_nosignal": self.restricted_nosignal,
            "degenerate": self.degenerate,
            "coexistence": self.coexistence,
            "samples": self.samples,
            "schmidt_rank": self.schmidt_rank,
        }


def example_algebras(dims=(2, 2, 2), entangler="cnot", seed: int = 0
                     ) -> tuple[AlgebraSpec, AlgebraSpec, np.ndarray, str]:
    """A1 = B(A_L (x) A_R) (x) I and A2 = U (I (x) I (x) B(H_B)) U^dagger, U on (A_R, B)."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise DimensionError(f"expected three factors (A_L, A_R, B), got {dims}")
    name, u = entangler_matrix(entangler, (dims[1], dims[2]), seed)
    full_u = kron(np.eye(dims[0]), u)
    a1 = factor_embedding(dims, [0, 1])
    a2 = conjugate_algebra(factor_embedding(dims, [2]), full_u)
    return a1, a2, u, name


def restricted_example(dims=(2, 2, 2), entangler="cnot", seed: int = 0,
                       samples: int = 1000) -> RestrictedReport:
    """Noncommuting algebras with no signalling from operations on A_L alone.

    Builds ``samples`` random channels on A_L (embedded as Phi (x) id (x) id)
    paired with as many sampled states.
    """
    a1, a2, u, name = example_algebras(dims, entangler, seed)
    _, residual = commute_check(a1, a2)
    rank = operator_schmidt_rank(u, dims[1], dims[2])
    rng = module_rng(seed, "nosignal.restricted")
    n = a1.ambient_dim
    states = sample_states(rng, n, samples)
    obs = hermitian_observables(a2)
    worst = 0.0
    for i in range(samples):
        local = random_kraus(rng, dims[0], 1 + i % 3)
        ch = KrausChannel([_embed(k, dims, [0]) for k in local])
        rho = states[i]
        for x in obs:
            worst = max(worst, expectation_deviation(ch, rho, x))
    return RestrictedReport(
        entangler=name,
        dims=dims,
        commute_residual=residual,
        noncommuting=residual > 0.1,
        restricted_deviation=worst,
        restricted_nosignal=worst <= NOSIGNAL_TOL,
        degenerate=rank == 1,
        samples=samples,
        schmidt_rank=rank,
    )


def random_commuting_pair(rng: np.random.Generator, dims=(2, 2)) -> tuple[AlgebraSpec, AlgebraSpec]:
    """Tensor-split pair generated by random local Hermitians, rotated by a global unitary."""
    da, db = dims
    v = random_unitary(rng, da * db)
    ga = [kron(h, np.eye(db)) for h in _random_local_set(rng, da)]
    gb = [kron(np.eye(da), h) for h in _random_local_set(rng, db)]
    a1 = generated_algebra(AlgebraSpec(da * db, [v @ g @ dagger(v) for g in ga]))
    a2 = generated_algebra(AlgebraSpec(da * db, [v @ g @ dagger(v) for g in gb]))
    return a1, a2


def _random_local_set(rng: np.random.Generator, dim: int) -> list[np.ndarray]:
    # one generator gives an abelian algebra, two generically give all of B(C^dim)
    return [random_hermitian(rng, dim) for _ in range(1 + int(rng.integers(2)))]
