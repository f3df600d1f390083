"""Order-of-magnitude figures for dressing-induced microcausality violation.

The dressed-field commutators are reduced to scalar ratios relative to the
local field amplitudes: a spacelike ratio ``G m / (c^2 L)``, an equal-time
rate given by that ratio times a characteristic frequency, and the protocol
figure of merit ``epsilon = tau * rate``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import ConfigError, ContractError

CSV_FIELDS = ("m_kg", "L_m", "tau_s", "freq_mode", "ratio", "freq_hz", "rate_hz", "epsilon")

UNITS = {
    "m_kg": "kg",
    "L_m": "m",
    "tau_s": "s",
    "freq_mode": "",
    "ratio": "1",
    "freq_hz": "s^-1",
    "rate_hz": "s^-1",
    "epsilon": "1",
}


class FrequencyMode(str, enum.Enum):
    REST_ENERGY = "REST_ENERGY"  # m c^2 / hbar
    KINETIC = "KINETIC"  # hbar / (2 m L^2)
    PROTOCOL = "PROTOCOL"  # 1 / tau

    @classmethod
    def parse(cls, value) -> "FrequencyMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown frequency mode {value!r}; expected one of "
                              f"{[m.value for m in cls]}") from None


@dataclass(frozen=True)
class DressingPoint:
    m: float
    L: float
    tau: float
    freq_mode: FrequencyMode = FrequencyMode.REST_ENERGY
    constants: PhysicalConstants = field(default=DEFAULT_CONSTANTS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "freq_mode", FrequencyMode.parse(self.freq_mode))
        if not (self.m > 0 and self.L > 0):
            raise ContractError(f"mass and width must be positive (m={self.m}, L={self.L})",
                                "positive DressingPoint")
        if not self.tau >= 0:
            raise ContractError(f"tau must be nonnegative, got {self.tau}", "positive DressingPoint")
        if self.freq_mode is FrequencyMode.PROTOCOL and self.tau == 0:
            raise ContractError("PROTOCOL frequency 1/tau needs tau > 0", "positive DressingPoint")


def ratio_spacelike(p: DressingPoint) -> float:
    """Relative size ``G m / (c^2 L)`` of the spacelike field commutator."""
    k = p.constants
    return k.G * p.m / (k.c**2 * p.L)


def frequency(p: DressingPoint) -> float:
    k = p.constants
    if p.freq_mode is FrequencyMode.REST_ENERGY:
        return p.m * k.c**2 / k.hbar
    if p.freq_mode is FrequencyMode.KINETIC:
        return k.hbar / (2.0 * p.m * p.L**2)
    return 1.0 / p.tau


def rate_equal_time(p: DressingPoint) -> float:
    return ratio_spacelike(p) * frequency(p)


def epsilon(p: DressingPoint) -> float:
    return p.tau * rate_equal_time(p)


def figures(p: DressingPoint) -> dict:
    """One report row for ``p``, keyed by CSV_FIELDS."""
    ratio = ratio_spacelike(p)
    freq = frequency(p)
    rate = ratio * freq
    return {
        "m_kg": p.m,
        "L_m": p.L,
        "tau_s": p.tau,
        "freq_mode": p.freq_mode.value,
        "ratio": ratio,
        "freq_hz": freq,
        "rate_hz": rate,
        "epsilon": p.tau * rate,
    }


@dataclass(frozen=True)
class SweepGrid:
    m: Sequence[float]
    L: Sequence[float]
    tau: Sequence[float]
    modes: Sequence[FrequencyMode] = tuple(FrequencyMode)

    @classmethod
    def from_mapping(cls, cfg: Mapping) -> "SweepGrid":
        allowed = {"m", "L", "tau", "modes"}
        extra = set(cfg) - allowed
        if extra:
            raise ConfigError(f"unknown fields {sorted(extra)}", "grid")
        values = {}
        for key in ("m", "L", "tau"):
            if key not in cfg:
                raise ConfigError("missing required field", f"grid.{key}")
            raw = cfg[key]
            raw = [raw] if isinstance(raw, (int, float)) else raw
            if not isinstance(raw, (list, tuple)) or not raw:
                raise ConfigError("expected a nonempty list of numbers", f"grid.{key}")
            for i, v in enumerate(raw):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"expected a finite number, got {v!r}", f"grid.{key}[{i}]")
            values[key] = tuple(float(v) for v in raw)
        modes = cfg.get("modes", [m.value for m in FrequencyMode])
        if not isinstance(modes, (list, tuple)) or not modes:
            raise ConfigError("expected a nonempty list of mode names", "grid.modes")
        parsed = []
        for i, name in enumerate(modes):
            try:
                parsed.append(FrequencyMode.parse(name))
            except ConfigError as exc:
                raise ConfigError(str(exc), f"grid.modes[{i}]") from None
        return cls(values["m"], values["L"], values["tau"], tuple(parsed))


def sweep(grid: SweepGrid | Mapping, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> list[dict]:
    """Rows for every (m, L, tau, mode), lexicographic in the grid indices."""
    if not isinstance(grid, SweepGrid):
        grid = SweepGrid.from_mapping(grid)
    if not (grid.m and grid.L and grid.tau and grid.modes):
        raise ConfigError("sweep grid must be nonempty", "grid")
    rows = []
    for m, L, tau, mode in itertools.product(grid.m, grid.L, grid.tau, grid.modes):
        try:
            p = DressingPoint(m, L, tau, mode, constants)
        except ContractError as exc:
            raise ConfigError(str(exc), "grid") from None
        rows.append(figures(p))
    return rows


def reference_point(mode: FrequencyMode | str = FrequencyMode.REST_ENERGY, tau: float = 1.0) -> DressingPoint:
    """The reference experiment: m = 1e-14 kg, L = 1e-6 m."""
    return DressingPoint(1e-14, 1e-6, tau, FrequencyMode.parse(mode))

