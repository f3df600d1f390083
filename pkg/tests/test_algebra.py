from __future__ import annotations

import math

import numpy as np
import pytest

from gielab import algebra as alg
from gielab import nosignal
from gielab.algebra import AlgebraSpec
from gielab.errors import ContractError, DimensionError
from gielab.qmat import I2, SX, SY, SZ, kron, projector
from gielab.sampling import random_density, random_hermitian, random_unitary, sample_states

BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)


def commutant_rank_oracle(gens, n):
    """Dimension of the commutant from the rank of an explicitly built linear map."""
    rows = []
    for g in gens:
        for h in (g, g.conj().T):
            m = np.zeros((n * n, n * n), dtype=complex)
            for idx in range(n * n):
                x = np.zeros(n * n, dtype=complex)
                x[idx] = 1
                x = x.reshape(n, n)
                m[:, idx] = (x @ h - h @ x).reshape(-1)
            rows.append(m)
    if not rows:
        return n * n
    return n * n - np.linalg.matrix_rank(np.vstack(rows), tol=1e-9)


class TestCommutant:
    def test_first_factor(self):
        a = AlgebraSpec(4, [kron(SZ, I2), kron(SX, I2)])
        c = alg.commutant(a)
        assert c.dimension == 4
        target = alg.factor_embedding((2, 2), [1])
        assert alg.same_span(c.basis_columns(), target.basis_columns())[0]

    def test_identity(self):
        assert alg.commutant(AlgebraSpec(3, [np.eye(3)])).dimension == 9
        assert alg.commutant(AlgebraSpec(3, [])).dimension == 9

    def test_irreducible_pair_schur(self, rng):
        for n in (2, 3, 5):
            a = AlgebraSpec(n, [random_hermitian(rng, n), random_hermitian(rng, n)])
            assert alg.commutant(a).dimension == 1
            assert commutant_rank_oracle(a.generators, n) == 1

    @pytest.mark.parametrize("seed", range(5))
    def test_dimension_matches_rank_oracle(self, seed):
        g = np.random.default_rng(seed)
        n = 2 + seed % 3
        gens = [g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))]
        if seed % 2:
            gens = [kron(random_hermitian(g, 2), np.eye(2))]
            n = 4
        assert alg.commutant(AlgebraSpec(n, gens)).dimension == commutant_rank_oracle(gens, n)

    def test_orthonormal_basis(self, rng):
        c = alg.commutant(AlgebraSpec(4, [kron(random_hermitian(rng, 2), I2)]))
        q = c.basis_columns()
        assert np.allclose(q.conj().T @ q, np.eye(q.shape[1]), atol=1e-12)

    def test_idempotence(self, rng):
        a = AlgebraSpec(6, [kron(random_hermitian(rng, 2), np.eye(3)), kron(np.eye(2), np.diag([1, 1, 2.0]))])
        c1 = alg.commutant(a)
        c3 = alg.commutant(alg.commutant(c1))
        assert alg.same_span(c1.basis_columns(), c3.basis_columns())[0]

    def test_shape_validation(self):
        with pytest.raises(DimensionError):
            AlgebraSpec(3, [np.eye(2)])
        with pytest.raises(ContractError):
            AlgebraSpec(2, [SX]).dimension


class TestGenerated:
    def test_abelian(self):
        a = alg.algebrize([SZ])
        assert a.dimension == 2
        assert a.membership_residual(I2) <= 1e-10
        assert a.membership_residual(SZ) <= 1e-10
        assert a.membership_residual(SX) > 0.5

    def test_pauli_pair_full(self):
        a = alg.algebrize([SX, SZ])
        assert a.dimension == 4
        assert a.membership_residual(SY) <= 1e-10

    def test_contains_generators(self, rng):
        gens = [random_hermitian(rng, 3), rng.standard_normal((3, 3)) + 0j]
        a = alg.algebrize(gens)
        assert max(a.membership_residual(g) for g in gens) <= 1e-10

    def test_closed_under_products_and_adjoints(self, rng):
        a = alg.algebrize([kron(random_hermitian(rng, 2), I2)])
        b = a.closed_basis
        worst = max(a.membership_residual(x @ y) for x in b for y in b)
        worst = max(worst, max(a.membership_residual(x.conj().T) for x in b))
        assert worst <= 1e-9

    @pytest.mark.parametrize("seed", range(6))
    def test_word_closure_agrees(self, seed):
        g = np.random.default_rng(100 + seed)
        n = 2 + seed % 3
        if seed % 2:
            gens = [random_hermitian(g, n)]
        else:
            gens = [random_hermitian(g, n), np.diag(np.arange(n, dtype=float)).astype(complex)]
        a = alg.generated_algebra(AlgebraSpec(n, gens))
        assert alg.same_span(alg.word_closure(a), a.basis_columns())[0]

    def test_word_closure_block_algebra(self):
        g = np.zeros((4, 4), dtype=complex)
        g[:2, :2] = SX
        g[2:, 2:] = 2 * SZ
        a = alg.generated_algebra(AlgebraSpec(4, [g]))
        assert alg.same_span(alg.word_closure(a), a.basis_columns())[0]


class TestCenter:
    def test_full_algebra_factor(self):
        z, factor = alg.center_and_factor(alg.full_matrix_algebra(3))
        assert factor and z.shape[0] == 1

    def test_diagonal_not_factor(self):
        z, factor = alg.center_and_factor(alg.algebrize([np.diag([1.0, 2.0])]))
        assert not factor and z.shape[0] == 2

    def test_tensor_factor(self):
        a = alg.algebrize([kron(SX, I2), kron(SZ, I2)])
        z, factor = alg.center_and_factor(a)
        assert factor
        assert alg.commutant(a).dimension == 4

    def test_block_algebra_center(self):
        g = np.zeros((4, 4), dtype=complex)
        g[:2, :2] = SX
        g[2:, 2:] = SZ
        h = np.diag([1.0, 1, -1, -1]).astype(complex)
        k = np.zeros((4, 4), dtype=complex)
        k[:2, :2] = SZ
        # upper block is all of M_2, lower block is diagonal: M_2 + C + C
        a = alg.algebrize([g, h, k])
        assert a.dimension == 6
        z, factor = alg.center_and_factor(a)
        assert not factor and z.shape[0] == 3

    def test_requires_closed(self):
        with pytest.raises(ContractError):
            alg.center_and_factor(AlgebraSpec(2, [SX]))


class TestCommuteCheck:
    def test_tensor_split(self):
        a1 = alg.factor_embedding((2, 2), [0])
        a2 = alg.factor_embedding((2, 2), [1])
        ok, res = alg.commute_check(a1, a2)
        assert ok and res <= 1e-12

    def test_entangled_example(self):
        a1 = AlgebraSpec(8, [kron(kron(SZ, I2), I2)])
        _, a2, _, _ = nosignal.example_algebras((2, 2, 2), "cnot")
        ok, _ = alg.commute_check(a1, a2)
        assert ok  # sigma_z on A_L is untouched by an entangler on (A_R, B)
        # sigma_x on the control of the CNOT does not commute with Z_R Z_B
        a1r = AlgebraSpec(8, [kron(kron(I2, SX), I2)])
        ok, res = alg.commute_check(a1r, a2)
        assert not ok and res > 0.1

    def test_with_commutant(self, rng):
        for _ in range(4):
            a = alg.algebrize([random_hermitian(rng, 4)])
            ok, _ = alg.commute_check(a, alg.commutant(a))
            assert ok

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            alg.commute_check(AlgebraSpec(2, [SX]), AlgebraSpec(3, [np.eye(3)]))


class TestMeet:
    def test_self(self, rng):
        e = projector(rng.standard_normal(3) + 0j)
        e = e / np.trace(e)
        assert np.allclose(alg.projection_meet(e, e), e, atol=1e-9)

    def test_orthogonal(self):
        e = np.diag([1.0, 0, 0])
        f = np.diag([0.0, 1, 1])
        assert np.allclose(alg.projection_meet(e, f), 0)

    def test_commuting_is_product(self, rng):
        u = random_unitary(rng, 4)
        e = u @ np.diag([1.0, 1, 0, 0]) @ u.conj().T
        f = u @ np.diag([0.0, 1, 1, 0]) @ u.conj().T
        m = alg.projection_meet(e, f)
        assert np.allclose(m, e @ f, atol=1e-9)
        assert np.allclose(m @ m, m, atol=1e-9)

    def test_generic_planes_meet_in_line(self, rng):
        q1, _ = np.linalg.qr(rng.standard_normal((3, 2)) + 0j)
        q2, _ = np.linalg.qr(rng.standard_normal((3, 2)) + 0j)
        m = alg.projection_meet(q1 @ q1.conj().T, q2 @ q2.conj().T)
        assert np.trace(m).real == pytest.approx(1.0)
        v = np.linalg.eigh(m)[1][:, -1]
        assert np.linalg.norm(q1 @ q1.conj().T @ v - v) < 1e-8
        assert np.linalg.norm(q2 @ q2.conj().T @ v - v) < 1e-8

    def test_rejects_non_projection(self):
        with pytest.raises(ContractError):
            alg.projection_meet(np.diag([0.5, 0]), np.eye(2))


class TestUncorrelated:
    def test_product_state(self, rng):
        rho = kron(random_density(rng, 2), random_density(rng, 3))
        ok, dev = alg.uncorrelated_check(rho, alg.factor_embedding((2, 3), [0]),
                                         alg.factor_embedding((2, 3), [1]), samples=50)
        assert ok and dev <= 1e-8

    def test_bell_sz_projections(self):
        rho = projector(BELL)
        e = kron(np.diag([1.0, 0]), I2)
        f = kron(I2, np.diag([1.0, 0]))
        assert alg.correlation_deviation(rho, e, f) == pytest.approx(0.25)
        ok, dev = alg.uncorrelated_check(rho, alg.factor_embedding((2, 2), [0]),
                                         alg.factor_embedding((2, 2), [1]), samples=50)
        assert not ok and dev > 0.1

    def test_noncommuting_sweep_always_correlated(self, rng):
        a1, a2, _, _ = nosignal.example_algebras((2, 2, 2), "cnot")
        for i, rho in enumerate(sample_states(rng, 8, 100)):
            ok, _ = alg.uncorrelated_check(rho, a1, a2, samples=20, seed=i)
            assert not ok


def test_embed_and_spectral_projections(rng):
    op = random_hermitian(rng, 2)
    assert np.allclose(alg._embed(op, (2, 2, 2), [2]), np.kron(np.eye(4), op))
    # factor 1 of (2, 3, 2) sits in the middle
    op3 = random_hermitian(rng, 3)
    assert np.allclose(alg._embed(op3, (2, 3, 2), [1]), np.kron(np.kron(np.eye(2), op3), np.eye(2)))
    h = np.diag([1.0, 1.0, 2.0])
    projs = alg.spectral_projections(h)
    assert len(projs) == 2 and np.allclose(sum(projs), np.eye(3))
