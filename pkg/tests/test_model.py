import math

import numpy as np
import pytest

from opmodel.errors import DimensionMismatch, NotC0, NotContraction, TruncationOverflow
from opmodel.model import (
    BlockColumnMap,
    apply_L,
    coisometry_residual,
    defect_operator,
    model_coisometry,
    telescoping_check,
)
from opmodel.numerics import ToleranceConfig, max_abs
from opmodel.spaces import KernelSpec, TruncatedSpace, shift_matrix
from oracles import random_contraction

JORDAN = np.array([[0.0, 1.0], [0.0, 0.0]])


class TestDefect:
    def test_zero(self):
        dd = defect_operator(np.zeros((2, 2)))
        np.testing.assert_allclose(dd.D, np.eye(2))
        assert dd.defect_dim == 2

    def test_scalar(self):
        dd = defect_operator([[0.5]])
        assert dd.D[0, 0] == pytest.approx(math.sqrt(0.75), abs=1e-15)
        assert dd.defect_dim == 1

    def test_jordan(self):
        dd = defect_operator(JORDAN)
        np.testing.assert_allclose(dd.D, np.diag([0.0, 1.0]), atol=1e-15)
        np.testing.assert_allclose(dd.basis_E, [[0.0], [1.0]], atol=1e-15)

    def test_rejects_expansion(self):
        with pytest.raises(NotContraction):
            defect_operator([[1.2]])

    def test_invariants(self, rng):
        T = random_contraction(rng, 7, 0.9)
        dd = defect_operator(T)
        E = dd.basis_E
        assert max_abs(E.conj().T @ E - np.eye(dd.defect_dim)) <= 1e-12
        assert max_abs(dd.D - E @ (E.conj().T @ dd.D)) <= 1e-10
        assert max_abs(dd.D @ dd.D - (np.eye(7) - T @ T.conj().T)) <= 1e-12


class TestApplyL:
    def test_zero_operator(self):
        seq = apply_L(np.zeros((2, 2)), [1.0, 2.0], 3)
        np.testing.assert_allclose(seq.coefficients[0], [1.0, 2.0])
        np.testing.assert_array_equal(seq.coefficients[1:], 0)

    @pytest.mark.parametrize("M", [0, 1, 5, 30])
    def test_scalar_geometric(self, M):
        seq = apply_L([[0.5]], [1.0], M)
        np.testing.assert_allclose(seq.coefficients[:, 0], math.sqrt(0.75) * 0.5 ** np.arange(M + 1), rtol=1e-14)
        assert seq.norm_sq == pytest.approx(1 - 0.25 ** (M + 1), abs=1e-15)

    def test_jordan(self):
        seq = apply_L(JORDAN, [1.0, 0.0], 3)
        np.testing.assert_allclose(seq.coefficients[:, 0], [0, 1, 0, 0], atol=1e-15)
        assert seq.norm_sq == pytest.approx(1.0)

    def test_requires_c0(self):
        with pytest.raises(NotC0):
            apply_L(np.eye(2), [1.0, 0.0], 2)

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            apply_L([[0.5]], [1.0, 2.0], 2)

    def test_norm_identity(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 9))
            T = random_contraction(rng, n, 0.95)
            h = rng.normal(size=n) + 1j * rng.normal(size=n)
            seq = apply_L(T, h, int(rng.integers(0, 40)))
            assert abs(seq.norm_sq + seq.tail_norm_sq - np.vdot(h, h).real) <= 1e-10


class TestModelCoisometry:
    def test_zero(self):
        Pi = model_coisometry(np.zeros((2, 2)))
        assert Pi.trunc_order == 0 and Pi.tail_bound == 0.0
        np.testing.assert_array_equal(Pi.blocks[0], np.eye(2))

    def test_jordan(self):
        Pi = model_coisometry(JORDAN)
        np.testing.assert_allclose(Pi.blocks[0], [[0], [1]], atol=1e-15)
        np.testing.assert_allclose(Pi.blocks[1], [[1], [0]], atol=1e-15)
        np.testing.assert_allclose(Pi.gram(), np.eye(2), atol=1e-15)

    def test_scalar_order(self):
        # brute force: smallest M with 0.25^(M+1) <= 1e-12
        expected = next(M for M in range(100) if 0.25 ** (M + 1) <= 1e-12)
        assert expected == 19
        Pi = model_coisometry([[0.5]], ToleranceConfig(trunc_tol=1e-12))
        assert Pi.trunc_order == expected
        assert Pi.gram()[0, 0].real == pytest.approx(1 - 0.25**20, abs=1e-15)

    def test_intertwining_exact(self, rng):
        T = random_contraction(rng, 6, 0.8)
        Pi = model_coisometry(T)
        for m in range(Pi.trunc_order):
            assert max_abs(Pi.blocks[m + 1] - T @ Pi.blocks[m]) <= 1e-15

    def test_truncation_overflow(self):
        with pytest.raises(TruncationOverflow):
            model_coisometry([[0.999]], ToleranceConfig(max_order=100))

    def test_not_c0(self):
        with pytest.raises(NotC0):
            model_coisometry(np.eye(3))

    def test_exact_tail_pattern_for_contractions(self, rng):
        T = random_contraction(rng, 5, 0.9)
        Pi = model_coisometry(T)
        P = np.linalg.matrix_power(T, Pi.trunc_order + 1)
        assert max_abs(Pi.gram() - (np.eye(5) - P @ P.conj().T)) <= 1e-12
        assert coisometry_residual(Pi) <= Pi.tail_bound + 1e-9

    def test_nilpotent_shift_exact(self):
        T = shift_matrix(TruncatedSpace(KernelSpec.bergman(3.0), 8, 2))
        Pi = model_coisometry(T)
        assert Pi.tail_bound == 0.0 and Pi.trunc_order == 8
        assert coisometry_residual(Pi) <= 1e-12

    def test_json_round_trip(self, rng):
        Pi = model_coisometry(random_contraction(rng, 3, 0.5))
        back = BlockColumnMap.from_json(Pi.to_json())
        np.testing.assert_array_equal(back.blocks, Pi.blocks)
        assert back.tail_bound == Pi.tail_bound

    def test_json_empty_defect(self):
        Pi = BlockColumnMap(np.zeros((1, 2, 0), dtype=complex), 0.0)
        assert BlockColumnMap.from_json(Pi.to_json()).blocks.shape == (1, 2, 0)


class TestTelescoping:
    def test_m0(self, rng):
        assert telescoping_check(random_contraction(rng, 4, 0.9), 0) <= 1e-15

    def test_jordan(self):
        assert telescoping_check(JORDAN, 1) == 0.0

    def test_scalar(self):
        assert telescoping_check([[0.5]], 3) <= 1e-16

    def test_holds_for_unitary(self):
        # exact algebra, not a C.0 statement
        assert telescoping_check(np.eye(3), 10) == 0.0

    def test_rejects_expansion(self):
        with pytest.raises(NotContraction):
            telescoping_check([[2.0]], 1)
