from __future__ import annotations

import math

import numpy as np
import pytest

from gielab import algebra as alg
from gielab import nosignal as ns
from gielab.errors import ContractError, DimensionError
from gielab.nosignal import KrausChannel, Pvm, Verdict
from gielab.qmat import I2, SX, SZ, kron, projector
from gielab.sampling import random_density, random_kraus, random_unitary, sample_states

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
Z_PVM = Pvm([np.diag([1.0, 0]), np.diag([0.0, 1])])
X_PVM = Pvm([(I2 + SX) / 2, (I2 - SX) / 2])


class TestPvm:
    def test_validation(self):
        with pytest.raises(ContractError):
            Pvm([np.diag([1.0, 0])])  # does not sum to I
        with pytest.raises(ContractError):
            Pvm([np.diag([1.0, 0]), np.diag([1.0, 1])])
        with pytest.raises(ContractError):
            Pvm([np.diag([0.5, 0.5]), np.diag([0.5, 0.5])])
        with pytest.raises(DimensionError):
            Pvm([np.eye(2), np.zeros((3, 3))])

    def test_trivial_pvm(self, rng):
        rho = random_density(rng, 3)
        assert np.allclose(ns.luders_update(rho, Pvm([np.eye(3)])), rho)

    def test_diagonal_fixed_point(self):
        rho = np.diag([0.3, 0.7]).astype(complex)
        assert np.allclose(ns.luders_update(rho, Z_PVM), rho)

    def test_plus_state_dephases(self):
        plus = projector(np.array([1, 1]) / math.sqrt(2))
        assert np.allclose(ns.luders_update(plus, Z_PVM), np.eye(2) / 2)

    def test_properties(self, rng):
        u = random_unitary(rng, 4)
        pvm = Pvm([u @ np.diag(v) @ u.conj().T for v in ([1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0])])
        for rho in sample_states(rng, 4, 10):
            out = ns.luders_update(rho, pvm)
            assert abs(np.trace(out) - 1) <= 1e-12
            assert np.min(np.linalg.eigvalsh(out)) >= -1e-12
            assert np.allclose(ns.luders_update(out, pvm), out, atol=1e-12)

    def test_dim_mismatch(self, rng):
        with pytest.raises(DimensionError):
            ns.luders_update(random_density(rng, 3), Z_PVM)


class TestKraus:
    def test_validation(self):
        with pytest.raises(ContractError):
            KrausChannel([0.5 * np.eye(2)])
        with pytest.raises(DimensionError):
            KrausChannel([np.eye(2), np.zeros((3, 3))])

    def test_apply_and_dual(self, rng):
        ch = KrausChannel(random_kraus(rng, 3, 3))
        rho = random_density(rng, 3)
        x = rng.standard_normal((3, 3))
        x = x + x.T
        assert np.trace(ch.apply(rho)) == pytest.approx(1.0)
        assert np.trace(ch.apply(rho) @ x) == pytest.approx(np.trace(rho @ ch.dual(x)))

    def test_local_from_generators(self):
        a = alg.factor_embedding((2, 2), [0])
        ch = KrausChannel([kron(k, I2) for k in ((I2 + SZ) / 2, (I2 - SZ) / 2)])
        ok, res = ns.is_local_kraus(ch, a)
        assert ok and res <= 1e-12

    def test_local_unitary(self, rng):
        a = alg.factor_embedding((2, 2), [0])
        ok, _ = ns.is_local_kraus(KrausChannel([kron(random_unitary(rng, 2), I2)]), a)
        assert ok

    def test_nonlocal_component(self):
        a = alg.factor_embedding((2, 2), [0])
        ok, res = ns.is_local_kraus(KrausChannel([kron(I2, SX)]), a)
        assert not ok
        # I (x) X is orthogonal to B(C^2) (x) I in the Frobenius inner product
        assert res == pytest.approx(2.0)

    def test_random_local_channel(self, rng):
        a = alg.algebrize([kron(SX, I2), kron(SZ, I2)])
        for n_ops in (1, 2, 3):
            ok, _ = ns.is_local_kraus(ns.random_local_channel(a, rng, n_ops), a)
            assert ok


class TestOperational:
    def test_commuting_pair(self, rng):
        a1 = alg.factor_embedding((2, 3), [0])
        a2 = alg.factor_embedding((2, 3), [1])
        chans = [ns.random_local_channel(a1, rng, 2) for _ in range(10)]
        chans += [ns.random_pvm(a1, rng).channel() for _ in range(10)]
        ok, dev = ns.operational_nosignal_check(a1, a2, chans, sample_states(rng, 6, 10))
        assert ok and dev <= 1e-12

    def test_random_commuting_pairs(self, rng):
        for shape in ((2, 2), (3, 2)):
            a1, a2 = ns.random_commuting_pair(rng, shape)
            assert alg.commute_check(a1, a2)[0]
            chans = [ns.random_local_channel(a1, rng) for _ in range(5)]
            ok, _ = ns.operational_nosignal_check(a1, a2, chans, sample_states(rng, a1.ambient_dim, 5))
            assert ok

    def test_noncommuting_luders_signals(self):
        a1 = alg.algebrize([SX])
        a2 = alg.algebrize([SZ])
        zero = projector(np.array([1, 0]))
        ok, dev = ns.operational_nosignal_check(a1, a2, [X_PVM.channel()], [zero])
        assert not ok
        assert dev == pytest.approx(1.0)  # <sigma_z> goes from 1 to 0

    def test_rejects_nonlocal_channel(self):
        a1 = alg.factor_embedding((2, 2), [0])
        a2 = alg.factor_embedding((2, 2), [1])
        ch = KrausChannel([kron(I2, SX)])
        with pytest.raises(ContractError):
            ns.operational_nosignal_check(a1, a2, [ch], [np.eye(4) / 4])
        ns.operational_nosignal_check(a1, a2, [ch], [np.eye(4) / 4], restricted=True)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            ns.operational_nosignal_check(alg.algebrize([SX]), alg.full_matrix_algebra(3), [], [])


class TestMacrocausality:
    def test_tensor_split(self):
        rec = ns.macrocausality_equiv_test(alg.factor_embedding((2, 2), [0]), alg.factor_embedding((2, 2), [1]))
        assert rec.verdict is Verdict.COMMUTING_VERIFIED
        assert rec.worst_deviation <= 1e-12
        assert rec.witness is None

    def test_qubit_sx_sz(self):
        rec = ns.macrocausality_equiv_test(alg.algebrize([SX]), alg.algebrize([SZ]))
        assert rec.verdict is Verdict.SIGNALLING_WITNESS
        # Q - sum P Q P = sigma_z / 2 for Q = |0><0|
        assert rec.witness.deviation == pytest.approx(0.5)
        w = rec.witness
        before = np.trace(w.state @ w.projection).real
        after = np.trace(ns.luders_update(w.state, w.pvm) @ w.projection).real
        assert abs(before - after) == pytest.approx(w.deviation)

    def test_entangler_example(self):
        a1, a2, _, _ = ns.example_algebras((2, 2, 2), "cnot")
        rec = ns.macrocausality_equiv_test(a1, a2)
        assert rec.verdict is Verdict.SIGNALLING_WITNESS
        assert rec.witness.deviation > 1e-3

    def test_inconclusive_with_empty_budget(self):
        # noncommuting, but no trials to find a witness with
        a1 = alg.algebrize([SX])
        a2 = alg.algebrize([SZ])
        rec = ns.macrocausality_equiv_test(a1, a2, budget=0)
        assert rec.verdict is Verdict.INCONCLUSIVE

    def test_deterministic(self):
        a1, a2, _, _ = ns.example_algebras()
        r1 = ns.macrocausality_equiv_test(a1, a2, seed=4).summary()
        r2 = ns.macrocausality_equiv_test(a1, a2, seed=4).summary()
        assert r1 == r2


class TestRestricted:
    @pytest.mark.parametrize("entangler", ["cnot", "swap", "random"])
    def test_coexistence(self, entangler):
        rep = ns.restricted_example((2, 2, 2), entangler, seed=0, samples=200)
        assert rep.noncommuting and rep.commute_residual > 0.1
        assert rep.restricted_nosignal and rep.restricted_deviation <= 1e-9
        assert not rep.degenerate
        assert rep.coexistence

    def test_identity_degenerate(self):
        rep = ns.restricted_example((2, 2, 2), "identity", samples=50)
        assert rep.degenerate
        assert not rep.noncommuting
        assert rep.commute_residual <= 1e-12

    def test_product_unitary_degenerate(self, rng):
        u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
        rep = ns.restricted_example((2, 2, 2), u, samples=50)
        assert rep.degenerate and rep.schmidt_rank == 1

    def test_explicit_cnot_matrix(self):
        a1, a2, u, name = ns.example_algebras((2, 2, 2), CNOT)
        assert name == "matrix"
        # conjugating Bob's Paulis by CNOT: X_B stays, Z_B becomes Z_R Z_B
        assert a2.membership_residual(kron(I2, kron(I2, SX))) <= 1e-10
        assert a2.membership_residual(kron(I2, kron(SZ, SZ))) <= 1e-10
        assert a2.membership_residual(kron(I2, kron(I2, SZ))) > 0.5
        assert a1.membership_residual(kron(SX, kron(SX, I2))) <= 1e-10

    def test_unrestricted_channel_signals(self, rng):
        a1, a2, _, _ = ns.example_algebras((2, 2, 2), "cnot")
        # measuring sigma_x on A_R is a1-local but changes Bob's statistics
        ch = Pvm([kron(I2, kron(p, I2)) for p in ((I2 + SX) / 2, (I2 - SX) / 2)]).channel()
        states = sample_states(rng, 8, 20)
        ok, dev = ns.operational_nosignal_check(a1, a2, [ch], states)
        assert not ok and dev > 1e-3

    def test_errors(self):
        with pytest.raises(ValueError):
            ns.restricted_example((2, 2, 2), "bogus")
        with pytest.raises(DimensionError):
            ns.restricted_example((2, 3, 2), "cnot")
        with pytest.raises(DimensionError):
            ns.example_algebras((2, 2))
        with pytest.raises(ContractError):
            ns.example_algebras((2, 2, 2), 2 * np.eye(4))

    def test_schmidt_rank(self):
        assert ns.operator_schmidt_rank(CNOT, 2, 2) == 2
        swap = np.eye(4)[[0, 2, 1, 3]]
        assert ns.operator_schmidt_rank(swap, 2, 2) == 4
        assert ns.operator_schmidt_rank(np.eye(4), 2, 2) == 1
