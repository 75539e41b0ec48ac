import math

import numpy as np
import pytest

from opmodel.errors import DimensionMismatch, EmptyGenerators, NotC0, NotInvariant
from opmodel.invariant import (
    Subspace,
    check_invariant,
    compress,
    invariant_factorization,
    projection_distance,
    range_subspace,
    span_closure_invariant,
    verify_factorization,
)
from opmodel.numerics import is_partial_isometry, max_abs
from opmodel.spaces import KernelSpec, TruncatedSpace, classify_contraction, shift_matrix
from cases import KERNELS, random_shift_case
from oracles import brute_factorization, random_unitary

JORDAN = np.array([[0.0, 1.0], [0.0, 0.0]])
HARDY3 = shift_matrix(TruncatedSpace(KernelSpec.szego(), 3))


def unit(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v


class TestSpanClosure:
    def test_shift_from_z(self):
        S = span_closure_invariant(HARDY3, unit(4, 1))
        np.testing.assert_allclose(S.projection, np.diag([0, 1, 1, 1]), atol=1e-15)

    def test_shift_from_constant_is_everything(self):
        assert span_closure_invariant(HARDY3, unit(4, 0)).dim == 4

    def test_eigenvector(self):
        T = np.diag([0.5, 0.25])
        assert span_closure_invariant(T, unit(2, 1)).dim == 1

    def test_empty(self):
        with pytest.raises(EmptyGenerators):
            span_closure_invariant(HARDY3, np.zeros(4))

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            span_closure_invariant(HARDY3, np.ones(3))

    def test_result_is_invariant(self, rng):
        for _ in range(20):
            T = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            S = span_closure_invariant(T, rng.normal(size=(8, 1)))
            assert check_invariant(T, S).residual <= 1e-8 * max(1.0, max_abs(T))


class TestCheckInvariant:
    def test_zero_and_whole(self):
        assert check_invariant(HARDY3, Subspace.zero(4)).verdict
        assert check_invariant(HARDY3, Subspace(np.eye(4))).verdict

    def test_not_invariant(self):
        rep = check_invariant(HARDY3, Subspace(np.eye(4)[:, :1]))
        assert not rep.verdict and rep.residual == 1.0


class TestCompress:
    def test_jordan_tail(self):
        S = Subspace(np.eye(2)[:, :1])
        np.testing.assert_array_equal(compress(JORDAN, S), [[0.0]])

    def test_refuses_non_invariant(self):
        with pytest.raises(NotInvariant):
            compress(JORDAN, Subspace(np.eye(2)[:, 1:]))

    def test_preserves_c0(self, rng):
        for _ in range(10):
            _, T, S = random_shift_case(rng, KERNELS[int(rng.integers(0, 4))])
            if S.dim:
                assert classify_contraction(compress(T, S)).is_c0


class TestFactorization:
    def test_hardy_zS(self):
        S = span_closure_invariant(HARDY3, unit(4, 1))
        Pi = invariant_factorization(HARDY3, S)
        assert Pi.defect_dim == 1 and Pi.tail_bound == 0.0
        np.testing.assert_allclose(Pi.blocks[0][:, 0], unit(4, 1), atol=1e-15)
        np.testing.assert_allclose(Pi.gram(), np.diag([0, 1, 1, 1]), atol=1e-15)

    def test_bergman2_fixture(self):
        T = shift_matrix(TruncatedSpace(KernelSpec.bergman(2), 2))
        S = Subspace(np.eye(3)[:, 1:])
        Pi = invariant_factorization(T, S)
        np.testing.assert_allclose(Pi.gram(), np.diag([0, 1, 1]), atol=1e-14)
        np.testing.assert_allclose(Pi.blocks[0][:, 0], [0, 1, 0], atol=1e-14)

    def test_zero_subspace(self):
        Pi = invariant_factorization(HARDY3, Subspace.zero(4))
        assert Pi.blocks.shape == (1, 4, 0)
        assert verify_factorization(HARDY3, Subspace.zero(4), Pi).passed

    def test_refuses_unitary(self):
        with pytest.raises(NotC0):
            invariant_factorization(np.eye(2), Subspace(np.eye(2)))

    def test_wrong_subspace_detected(self):
        S = span_closure_invariant(HARDY3, unit(4, 1))
        Pi = invariant_factorization(HARDY3, S)
        other = span_closure_invariant(HARDY3, unit(4, 2))
        rep = verify_factorization(HARDY3, other, Pi)
        assert not rep.passed and rep.projection_residual >= 0.5

    def test_basis_independent(self, rng):
        space, T, S = random_shift_case(rng, KernelSpec.bergman(3.0), N=6, d=2)
        rotated = Subspace(S.basis @ random_unitary(rng, S.dim))
        a, b = invariant_factorization(T, S), invariant_factorization(T, rotated)
        np.testing.assert_allclose(a.blocks, b.blocks, atol=1e-10)

    def test_against_brute_force(self, rng):
        for spec in KERNELS:
            space, T, S = random_shift_case(rng, spec, N=5, d=1)
            Pi = invariant_factorization(T, S)
            blocks, _ = brute_factorization(T, S.basis, Pi.trunc_order)
            P = sum(B @ B.conj().T for B in blocks)
            assert max_abs(P - Pi.gram()) <= 1e-10

    def test_random_upper_triangular(self, rng):
        # T = U [[A, B], [0, C]] U* leaves U[:, :k] invariant
        for _ in range(25):
            n, k = int(rng.integers(2, 9)), 0
            k = int(rng.integers(1, n))
            G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            G[k:, :k] = 0
            U = random_unitary(rng, n)
            T = U @ (0.9 * G / np.linalg.norm(G, 2)) @ U.conj().T
            S = Subspace(U[:, :k])
            Pi = invariant_factorization(T, S)
            rep = verify_factorization(T, S, Pi)
            assert rep.passed, rep.to_dict()
            # sufficiency: ran Pi is invariant and equals S
            R = range_subspace(Pi)
            assert check_invariant(T, R).verdict
            assert projection_distance(R, S) <= 1e-8 + Pi.tail_bound

    def test_partial_isometry_iff_projection(self, rng):
        space, T, S = random_shift_case(rng, KernelSpec.szego(), N=7, d=2)
        Pi = invariant_factorization(T, S)
        A = Pi.flat()
        gram = A @ A.conj().T
        assert is_partial_isometry(A).verdict
        assert max_abs(gram @ gram - gram) <= 1e-10
        damaged = A * 0.9
        assert not is_partial_isometry(damaged).verdict
        g2 = damaged @ damaged.conj().T
        assert max_abs(g2 @ g2 - g2) > 1e-3

    @pytest.mark.parametrize("spec", KERNELS, ids=lambda s: f"{s.variant}{s.alpha or ''}")
    def test_random_shift_cases(self, rng, spec):
        for _ in range(15):
            _, T, S = random_shift_case(rng, spec)
            rep = verify_factorization(T, S, invariant_factorization(T, S))
            assert rep.passed and rep.intertwining_residual <= 1e-12

    def test_strict_contraction_tail(self):
        T = np.diag([0.5, 0.3])
        S = Subspace(np.eye(2)[:, :1])
        Pi = invariant_factorization(T, S)
        assert Pi.tail_bound == pytest.approx(0.25 ** (Pi.trunc_order + 1))
        assert Pi.gram()[0, 0].real == pytest.approx(1 - math.pow(0.25, Pi.trunc_order + 1), abs=1e-15)
