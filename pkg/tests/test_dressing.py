from __future__ import annotations

import math

import pytest

from gielab import dressing as dr
from gielab.constants import DEFAULT_CONSTANTS, PhysicalConstants
from gielab.dressing import DressingPoint, FrequencyMode, SweepGrid
from gielab.errors import ConfigError, ContractError

G, C, HBAR = 6.674e-11, 2.998e8, 1.055e-34


def test_constants():
    k = DEFAULT_CONSTANTS
    assert (k.G, k.c, k.hbar) == (G, C, HBAR)
    assert k.kappa_sq / k.G == pytest.approx(32 * math.pi, rel=1e-12)


class TestFormulas:
    def test_ratio(self):
        p = dr.reference_point()
        assert dr.ratio_spacelike(p) == pytest.approx(G * 1e-14 / (C**2 * 1e-6), rel=1e-15)
        assert dr.ratio_spacelike(p) == pytest.approx(7.43e-36, rel=1e-3)

    def test_ratio_linear_in_mass(self):
        a = DressingPoint(1e-14, 1e-6, 1.0)
        b = DressingPoint(2e-14, 1e-6, 1.0)
        assert dr.ratio_spacelike(b) == pytest.approx(2 * dr.ratio_spacelike(a), rel=1e-15)
        assert dr.ratio_spacelike(DressingPoint(1e-300, 1e-6, 1.0)) < 1e-300

    def test_frequencies(self):
        assert dr.frequency(dr.reference_point("REST_ENERGY")) == pytest.approx(1e-14 * C**2 / HBAR)
        assert dr.frequency(dr.reference_point("REST_ENERGY")) == pytest.approx(8.5e36, rel=0.01)
        assert dr.frequency(dr.reference_point("KINETIC")) == pytest.approx(HBAR / (2e-14 * 1e-12))
        assert dr.frequency(dr.reference_point("KINETIC")) == pytest.approx(5.3e-9, rel=0.01)
        assert dr.frequency(dr.reference_point("PROTOCOL", tau=1.0)) == 1.0

    def test_rates(self):
        rest = dr.reference_point("REST_ENERGY")
        kin = dr.reference_point("KINETIC")
        proto = dr.reference_point("PROTOCOL", tau=2.0)
        assert dr.rate_equal_time(rest) == pytest.approx(63.26, rel=1e-3)
        assert dr.rate_equal_time(kin) == pytest.approx(3.9e-44, rel=0.01)
        assert 1e-37 < dr.rate_equal_time(proto) < 1e-35
        for p in (rest, kin, proto):
            assert dr.rate_equal_time(p) == dr.ratio_spacelike(p) * dr.frequency(p)

    def test_epsilon(self):
        assert dr.epsilon(dr.reference_point("REST_ENERGY", 1.0)) == pytest.approx(63.26, rel=1e-3)
        assert dr.epsilon(dr.reference_point("KINETIC", 1.0)) == pytest.approx(3.9e-44, rel=0.01)
        assert dr.epsilon(dr.reference_point("KINETIC", 0.0)) == 0.0

    def test_invalid_points(self):
        with pytest.raises(ContractError):
            DressingPoint(0.0, 1e-6, 1.0)
        with pytest.raises(ContractError):
            DressingPoint(1e-14, 1e-6, -1.0)
        with pytest.raises(ContractError):
            DressingPoint(1e-14, 1e-6, 0.0, FrequencyMode.PROTOCOL)
        with pytest.raises(ConfigError):
            FrequencyMode.parse("bogus")

    def test_custom_constants(self):
        k = PhysicalConstants(G=1.0, c=1.0, hbar=1.0)
        p = DressingPoint(2.0, 4.0, 1.0, "kinetic", k)
        assert dr.ratio_spacelike(p) == 0.5
        assert dr.frequency(p) == 1.0 / 64


class TestSweep:
    def test_one_point(self):
        rows = dr.sweep({"m": [1e-14], "L": [1e-6], "tau": [1.0]})
        assert len(rows) == len(FrequencyMode)
        assert all(tuple(r) == dr.CSV_FIELDS for r in rows)

    def test_bit_identical_to_single_point(self):
        rows = dr.sweep({"m": [1e-15, 1e-14], "L": [1e-6], "tau": [1.0]})
        for r in rows:
            p = DressingPoint(r["m_kg"], r["L_m"], r["tau_s"], r["freq_mode"])
            assert r["ratio"] == dr.ratio_spacelike(p)
            assert r["freq_hz"] == dr.frequency(p)
            assert r["rate_hz"] == dr.rate_equal_time(p)
            assert r["epsilon"] == dr.epsilon(p)

    def test_ordering_and_monotonicity(self):
        grid = SweepGrid.from_mapping({"m": [1e-16, 1e-15, 1e-14], "L": [1e-7, 1e-6], "tau": [1.0, 2.0],
                                       "modes": ["KINETIC"]})
        rows = dr.sweep(grid)
        keys = [(r["m_kg"], r["L_m"], r["tau_s"]) for r in rows]
        assert keys == sorted(keys)
        for L in (1e-7, 1e-6):
            ratios = [r["ratio"] for r in rows if r["L_m"] == L and r["tau_s"] == 1.0]
            assert ratios == sorted(ratios) and len(set(ratios)) == 3

    @pytest.mark.parametrize("cfg,path", [
        ({"m": [1e-14], "L": [1e-6]}, "grid.tau"),
        ({"m": [], "L": [1e-6], "tau": [1]}, "grid.m"),
        ({"m": ["x"], "L": [1e-6], "tau": [1]}, "grid.m[0]"),
        ({"m": [1], "L": [1e-6], "tau": [1], "modes": ["FAST"]}, "grid.modes[0]"),
        ({"m": [1], "L": [1e-6], "tau": [1], "extra": 1}, "grid"),
        ({"m": [-1], "L": [1e-6], "tau": [1]}, "grid"),
    ])
    def test_malformed(self, cfg, path):
        with pytest.raises(ConfigError) as info:
            dr.sweep(cfg)
        assert info.value.path == path

    def test_units(self):
        assert set(dr.UNITS) == set(dr.CSV_FIELDS)
        assert dr.UNITS["rate_hz"] == "s^-1" and dr.UNITS["epsilon"] == "1"
