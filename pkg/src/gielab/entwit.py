"""Entanglement diagnostics: negativity, PPT test and the phase criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .protocol import PathPhases
from .qmat import partial_transpose, require_density


@dataclass(frozen=True)
class Bipartition:
    dims: tuple[int, ...]
    side_a: tuple[int, ...]

    def __init__(self, dims: Sequence[int], side_a: Sequence[int] = (0,)):
        dims = tuple(int(d) for d in dims)
        side = tuple(sorted(set(int(i) for i in side_a)))
        if not side or len(side) >= len(dims) or any(i < 0 or i >= len(dims) for i in side):
            raise DimensionError(f"side_a={side} must be a nonempty proper subset of {len(dims)} factors")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "side_a", side)


QUBIT_PAIR = Bipartition((2, 2), (0,))


def negativity(rho, cut: Bipartition = QUBIT_PAIR, tol: float = 1e-10) -> float:
    """(||rho^{T_A}||_1 - 1) / 2."""
    r = require_density(rho, tol)
    pt = partial_transpose(r, cut.dims, cut.side_a)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float((np.sum(np.abs(ev)) - 1.0) / 2.0))


def is_ppt(rho, cut: Bipartition = QUBIT_PAIR, tol: float = 1e-12) -> bool:
    r = require_density(rho)
    pt = partial_transpose(r, cut.dims, cut.side_a)
    return bool(np.min(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))) >= -tol)


def distance_to_2pi_multiple(angle: float) -> float:
    x = math.remainder(angle, 2.0 * math.pi)
    return abs(x)


def phase_entanglement_criterion(ph: PathPhases, tol: float = 1e-9) -> bool:
    """True when dphi_LR + dphi_RL is farther than ``tol`` from every multiple of 2 pi."""
    return distance_to_2pi_multiple(ph.dphi_LR + ph.dphi_RL) > tol
