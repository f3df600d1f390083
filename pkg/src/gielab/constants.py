from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants, rounded to four significant figures and pinned for reproducibility."""

    G: float = 6.674e-11
    c: float = 2.998e8
    hbar: float = 1.055e-34

    @property
    def kappa_sq(self) -> float:
        """Linearized-gravity coupling kappa^2 = 32 pi G."""
        return 32.0 * math.pi * self.G


DEFAULT_CONSTANTS = PhysicalConstants()
