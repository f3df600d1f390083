"""Bipartite, tripartite and field-mode descriptions of the BMV protocol.

Path labels are ordered ``L = 0``, ``R = 1``; two-mass kets are ordered
``|LL>, |LR>, |RL>, |RR>`` with mass 1 on the first tensor factor.  In the
tripartite model the mediator is the third (last) factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import ContractError, DegeneracyError, DimensionError, ImageChargeError
from .qmat import is_unitary, partial_trace

BRANCHES = ("L", "R")


@dataclass(frozen=True)
class BmvParams:
    m1: float
    m2: float
    d: float
    dx: float
    tau: float
    constants: PhysicalConstants = field(default=DEFAULT_CONSTANTS, compare=False)

    def __post_init__(self):
        for name in ("m1", "m2", "d", "tau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ContractError(f"{name} must be a positive finite number, got {v!r}",
                                    "positive BmvParams")
        if not (math.isfinite(self.dx) and self.dx >= 0):
            raise ContractError(f"dx must be nonnegative, got {self.dx!r}", "positive BmvParams")
        if self.dx >= self.d:
            raise DegeneracyError(f"dx={self.dx} must be smaller than d={self.d}", "dx < d")

    def branch_positions(self) -> dict[tuple[str, str], np.ndarray]:
        """Collinear geometry along x: mass 1 at 0 or dx, mass 2 at d or d + dx.

        Yields separations d for LL and RR, d + dx for LR and d - dx for RL.
        """
        x1 = {"L": 0.0, "R": self.dx}
        x2 = {"L": self.d, "R": self.d + self.dx}
        return {
            (a, b): np.array([[x1[a], 0.0, 0.0], [x2[b], 0.0, 0.0]])
            for a in BRANCHES for b in BRANCHES
        }


@dataclass(frozen=True)
class PathPhases:
    phi: float
    phi_LR: float
    phi_RL: float
    dphi_LR: float = field(init=False)
    dphi_RL: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dphi_LR", self.phi_LR - self.phi)
        object.__setattr__(self, "dphi_RL", self.phi_RL - self.phi)

    @classmethod
    def from_deltas(cls, dphi_LR: float, dphi_RL: float, phi: float = 0.0) -> "PathPhases":
        return cls(phi, phi + dphi_LR, phi + dphi_RL)

    @property
    def entangling_phase(self) -> float:
        return self.dphi_LR + self.dphi_RL

    def table(self) -> np.ndarray:
        """2x2 array of branch phases phi_XY (LL and RR share phi)."""
        return np.array([[self.phi, self.phi_LR], [self.phi_RL, self.phi]], dtype=float)


def compute_phases(p: BmvParams) -> PathPhases:
    k = p.constants
    pref = k.G * p.m1 * p.m2 * p.tau / k.hbar
    return PathPhases(pref / p.d, pref / (p.d + p.dx), pref / (p.d - p.dx))


def bipartite_state(ph: PathPhases) -> np.ndarray:
    """Two-mass ket after the interaction, in the |LL>,|LR>,|RL>,|RR> basis."""
    amps = np.exp(1j * ph.phi) / 2 * np.array(
        [1.0, np.exp(1j * ph.dphi_LR), np.exp(1j * ph.dphi_RL), 1.0]
    )
    return amps.astype(complex)


def ket_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# Tripartite model

@dataclass(frozen=True)
class MediatorSpec:
    """Path-controlled unitaries on a D-dimensional mediator and its ready state."""

    U_L: np.ndarray
    U_R: np.ndarray
    V_L: np.ndarray
    V_R: np.ndarray
    gamma0: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma0, dtype=complex).reshape(-1)
        dim = g.size
        for name in ("U_L", "U_R", "V_L", "V_R"):
            u = np.asarray(getattr(self, name), dtype=complex)
            if u.shape != (dim, dim):
                raise DimensionError(f"{name} has shape {u.shape}, mediator dim is {dim}")
            if not is_unitary(u, 1e-9):
                raise ContractError(f"{name} is not unitary", "unitary mediator")
            object.__setattr__(self, name, u)
        if abs(np.linalg.norm(g) - 1.0) > 1e-12:
            raise ContractError("gamma0 must be a unit vector", "normalized gamma0")
        object.__setattr__(self, "gamma0", g)

    @property
    def dim(self) -> int:
        return self.gamma0.size

    @property
    def U(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.U_L, self.U_R)

    @property
    def V(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.V_L, self.V_R)

    @classmethod
    def trivial(cls, dim: int = 1) -> "MediatorSpec":
        eye = np.eye(dim, dtype=complex)
        return cls(eye, eye, eye, eye, eye[0])

    def record_states(self, ordering: str = "UV") -> np.ndarray:
        """Mediator vectors W_XY gamma0, shape (2, 2, D)."""
        out = np.empty((2, 2, self.dim), dtype=complex)
        for x in range(2):
            for y in range(2):
                u, v = self.U[x], self.V[y]
                w = u @ v if ordering == "UV" else v @ u
                out[x, y] = w @ self.gamma0
        return out


def phase_table(phases) -> np.ndarray:
    if phases is None:
        return np.zeros((2, 2))
    if isinstance(phases, PathPhases):
        return phases.table()
    if isinstance(phases, Mapping):
        return np.array([[phases[(a, b)] if (a, b) in phases else phases[a + b]
                          for b in BRANCHES] for a in BRANCHES], dtype=float)
    t = np.asarray(phases, dtype=float)
    if t.shape != (2, 2):
        raise DimensionError(f"phase table must be 2x2, got shape {t.shape}")
    return t


def tripartite_evolve(ms: MediatorSpec, phases=None, ordering: str = "UV") -> np.ndarray:
    """Joint ket sum_XY (1/2) e^{i phi_XY} |X>|Y> (x) W_XY |gamma0>.

    ``W_XY = U_X V_Y`` for ``ordering="UV"`` (V acts first) or ``V_Y U_X``.
    ``phases`` supplies branch phases accumulated outside the controlled
    unitaries (a PathPhases, a 2x2 table, or a mapping keyed by "LR" etc.);
    omitted means none.
    """
    if ordering not in ("UV", "VU"):
        raise ValueError(f"ordering must be 'UV' or 'VU', got {ordering!r}")
    table = phase_table(phases)
    rec = ms.record_states(ordering)
    psi = 0.5 * np.exp(1j * table)[:, :, None] * rec
    psi = psi.reshape(-1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ContractError(f"evolved state has norm {norm}", "unitary evolution")
    return psi


def matter_state(psi: np.ndarray, mediator_dim: int) -> np.ndarray:
    """Reduced two-mass density matrix of a tripartite ket."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 4 * mediator_dim:
        raise DimensionError(f"ket length {psi.size} != 4 * {mediator_dim}")
    return partial_trace(ket_density(psi), [2, 2, mediator_dim], keep=[0, 1])


def diagonal_phase_mediator(ph, dim: int = 2) -> tuple[MediatorSpec, np.ndarray]:
    """Commuting diagonal controlled unitaries carrying the local part of ``ph``.

    Controlled unitaries whose records coincide, ``U_X V_Y|g0> = e^{i a_X + i b_Y}|g0>``,
    can only produce additively separable phases.  We encode
    ``a_L = 0, a_R = phi_RL - phi_LL, b_L = phi_LL, b_R = phi_LR`` on the
    mediator and return the remainder as a phase table, which is zero except
    on RR where it equals ``phi_LL + phi_RR - phi_LR - phi_RL`` (the
    entangling combination).  ``tripartite_evolve(ms, residual)`` then
    reproduces the bipartite state exactly.
    """
    t = phase_table(ph)
    a = (0.0, t[1, 0] - t[0, 0])
    b = (t[0, 0], t[0, 1])
    # basis vectors other than gamma0 = e_0 get distinct phases so the
    # unitaries are not scalar; they never touch the dynamics
    spread = 1.0 + np.arange(dim)

    def diag(theta):
        return np.diag(np.exp(1j * theta * spread))

    ms = MediatorSpec(diag(a[0]), diag(a[1]), diag(b[0]), diag(b[1]), np.eye(dim, dtype=complex)[0])
    residual = t - (np.add.outer(np.array(a), np.array(b)))
    return ms, residual


# ---------------------------------------------------------------------------
# Field modes

@dataclass(frozen=True)
class ModeGrid:
    """Periodic cubic box of side ``box_length`` with modes 2 pi n / box_length.

    Modes with ``max|n_i| <= n_max`` are kept and n = 0 is dropped.
    ``source_width`` is the Gaussian radius of each mass distribution,
    entering the couplings as a form factor exp(-k^2 sigma^2 / 2).  ``None``
    picks sigma = sqrt(12) / k_max so the summand at the cutoff face is
    damped by e^-12; ``0`` gives point masses and a sharp cutoff, whose
    partial sums oscillate instead of converging.
    """

    box_length: float
    n_max: int
    source_width: float | None = None

    def __post_init__(self):
        if not self.box_length > 0:
            raise ContractError("box_length must be positive", "positive box")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ContractError("n_max must be a positive integer", "empty grid")
        if self.source_width is not None and self.source_width < 0:
            raise ContractError("source_width must be nonnegative", "nonnegative width")

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.box_length

    @property
    def k_max(self) -> float:
        return self.dk * self.n_max

    @property
    def width(self) -> float:
        if self.source_width is None:
            return math.sqrt(12.0) / self.k_max
        return float(self.source_width)

    @property
    def n_modes(self) -> int:
        return (2 * self.n_max + 1) ** 3 - 1

    def k_vector(self, n: Sequence[int]) -> np.ndarray:
        n = np.asarray(n, dtype=int)
        if n.shape != (3,) or np.max(np.abs(n)) > self.n_max:
            raise DimensionError(f"mode index {tuple(n)} outside grid with n_max={self.n_max}")
        if not np.any(n):
            raise ContractError("the k = 0 mode is excluded", "k != 0")
        return self.dk * n

    def omega(self, n: Sequence[int], constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        return constants.c * float(np.linalg.norm(self.k_vector(n)))

    def modes(self, constants: PhysicalConstants = DEFAULT_CONSTANTS):
        """Yield (n, k_vector, omega) for every retained mode; small grids only."""
        rng = range(-self.n_max, self.n_max + 1)
        for nx in rng:
            for ny in rng:
                for nz in rng:
                    if nx == ny == nz == 0:
                        continue
                    k = self.dk * np.array([nx, ny, nz], dtype=float)
                    yield (nx, ny, nz), k, constants.c * float(np.linalg.norm(k))


def _coupling_from_k(k: np.ndarray, mass: float, volume: float, width: float,
                     constants: PhysicalConstants) -> np.ndarray:
    kc = constants
    g = mass * kc.c**2 * np.sqrt(2.0 * math.pi * kc.G / (kc.hbar * kc.c**3 * k * volume))
    if width > 0:
        g = g * np.exp(-0.5 * (k * width) ** 2)
    return g


def coupling(grid: ModeGrid, mass: float, index: Sequence[int],
             constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """g_k = m c^2 sqrt(2 pi G / (hbar c^3 k V)) in s^-1, times the form factor."""
    k = float(np.linalg.norm(grid.k_vector(index)))
    return float(_coupling_from_k(np.array(k), mass, grid.volume, grid.width, constants))


def _as_separations(separations) -> np.ndarray:
    r = np.asarray(separations, dtype=float)
    if r.ndim == 0:
        r = np.array([[float(r), 0.0, 0.0]])
    elif r.ndim == 1 and r.size == 3:
        r = r.reshape(1, 3)
    elif r.ndim == 1:
        r = np.column_stack([r, np.zeros_like(r), np.zeros_like(r)])
    if r.ndim != 2 or r.shape[1] != 3:
        raise DimensionError(f"separations must be scalars or 3-vectors, got shape {r.shape}")
    return r


def _check_separations(grid: ModeGrid, r: np.ndarray) -> None:
    norms = np.linalg.norm(r, axis=1)
    if np.any(norms <= 0):
        raise ContractError("separation must be nonzero", "separation > 0")
    if np.any(np.max(np.abs(r), axis=1) >= grid.box_length / 2):
        raise ImageChargeError(
            f"separation {float(np.max(norms)):.3g} m reaches half the box "
            f"({grid.box_length / 2:.3g} m); periodic images dominate", "separation << box")


def interaction_energies(grid: ModeGrid, m1: float, m2: float, separations,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """-sum_k 2 hbar g1_k g2_k cos(k.r) / omega_k for each separation vector r.

    The lattice is mirror symmetric in every axis, so cos(k.r) may be replaced
    by prod_i cos(k_i r_i) and the sum folded onto the octant n_i >= 0 with
    weight 2 per nonzero component.  One slab of constant n_x is built at a
    time to bound memory.
    """
    r = _as_separations(separations)
    _check_separations(grid, r)
    n = np.arange(grid.n_max + 1)
    kk = grid.dk * n
    wt = np.where(n > 0, 2.0, 1.0)
    cos = np.cos(kk[None, None, :] * r[:, :, None])  # (num_r, 3, n)
    ky2 = kk[:, None] ** 2 + kk[None, :] ** 2
    wyz = wt[:, None] * wt[None, :]
    total = np.zeros(len(r))
    hbar, c = constants.hbar, constants.c
    for ix in range(grid.n_max + 1):
        k = np.sqrt(kk[ix] ** 2 + ky2)
        if ix == 0:
            k[0, 0] = 1.0  # placeholder for the excluded zero mode
        g1 = _coupling_from_k(k, m1, grid.volume, grid.width, constants)
        g2 = _coupling_from_k(k, m2, grid.volume, grid.width, constants)
        term = 2.0 * hbar * g1 * g2 / (c * k) * wyz
        if ix == 0:
            term[0, 0] = 0.0
        inner = np.einsum("ry,yz,rz->r", cos[:, 1, :], term, cos[:, 2, :])
        total += wt[ix] * cos[:, 0, ix] * inner
    return -total


def mode_sum_potential(grid: ModeGrid, p: BmvParams, separation) -> float:
    """Mode-summed interaction energy (J) of the two masses at ``separation``.

    ``separation`` is a distance along x or a 3-vector.
    """
    return float(interaction_energies(grid, p.m1, p.m2, separation, p.constants)[0])


def newtonian_potential(p: BmvParams, separation: float) -> float:
    return -p.constants.G * p.m1 * p.m2 / separation


@dataclass(frozen=True)
class FieldPhaseResult:
    phases: dict  # (X, Y) -> phase in radians
    dphi_LR: float
    dphi_RL: float
    leakage: float
    min_omega_tau: float

    @property
    def entangling_phase(self) -> float:
        return (self.phases[("L", "R")] + self.phases[("R", "L")]
                - self.phases[("L", "L")] - self.phases[("R", "R")])

    def path_phases(self) -> PathPhases:
        return PathPhases(self.phases[("L", "L")], self.phases[("L", "R")], self.phases[("R", "L")])


def field_phase_and_leakage(grid: ModeGrid, p: BmvParams, positions: Mapping | None = None
                            ) -> FieldPhaseResult:
    """Branch phases from the mode-summed energies and the largest mode displacement.

    Each mode is a displaced oscillator; in the adiabatic regime it contributes
    its ground-state energy shift, and the branch-dependent (cross) part of
    that shift is the mode-summed interaction energy E_XY.  The phase is
    -E_XY tau / hbar.  Self-energy terms are branch independent and dropped.

    ``positions`` maps (X, Y) to a 2x3 array of the two mass positions; the
    default is ``p.branch_positions()``.  ``leakage`` is max_k,i g_ik / omega_k,
    attained on the |n| = 1 shell because g/omega falls like k^(-3/2).
    """
    pos = p.branch_positions() if positions is None else positions
    keys = [(a, b) for a in BRANCHES for b in BRANCHES]
    seps = np.array([np.asarray(pos[key], dtype=float)[1] - np.asarray(pos[key], dtype=float)[0]
                     for key in keys])
    energies = interaction_energies(grid, p.m1, p.m2, seps, p.constants)
    hbar = p.constants.hbar
    phases = {key: float(-e * p.tau / hbar) for key, e in zip(keys, energies)}
    k1 = grid.dk
    a = max(float(_coupling_from_k(np.array(k1), m, grid.volume, grid.width, p.constants))
            for m in (p.m1, p.m2)) / (p.constants.c * k1)
    return FieldPhaseResult(
        phases=phases,
        dphi_LR=phases[("L", "R")] - phases[("L", "L")],
        dphi_RL=phases[("R", "L")] - phases[("L", "L")],
        leakage=a,
        min_omega_tau=p.constants.c * k1 * p.tau,
    )


def mediator_overlaps(ms: MediatorSpec, ordering: str = "UV") -> np.ndarray:
    """Gram matrix G[a, b] = <gamma_a|gamma_b> of the record states, a = 2X + Y."""
    rec = ms.record_states(ordering).reshape(4, -1)
    return rec.conj() @ rec.T

