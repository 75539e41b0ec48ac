import numpy as np
import pytest

from opmodel.errors import NotInvariant
from opmodel.invariant import Subspace, span_closure_invariant
from opmodel.spaces import KernelSpec, TruncatedSpace, shift_matrix
from opmodel.wandering import is_exploratory_kernel, wandering_span_check, wandering_subspace
from cases import random_shift_case


def shift(spec, N, d=1):
    return shift_matrix(TruncatedSpace(spec, N, d))


class TestWanderingSubspace:
    def test_zS_hardy(self):
        T = shift(KernelSpec.szego(), 3)
        S = span_closure_invariant(T, np.eye(4)[:, 1])
        W = wandering_subspace(T, S)
        np.testing.assert_allclose(W.projection, np.diag([0, 1, 0, 0]), atol=1e-15)

    def test_two_generators(self):
        T = shift(KernelSpec.szego(), 4)
        S = span_closure_invariant(T, np.eye(5)[:, [2]])
        assert wandering_subspace(T, S).dim == 1

    def test_not_invariant(self):
        T = shift(KernelSpec.szego(), 3)
        with pytest.raises(NotInvariant):
            wandering_subspace(T, Subspace(np.eye(4)[:, :1]))


class TestSpanCheck:
    def test_hardy_random(self, rng):
        for _ in range(20):
            _, T, S = random_shift_case(rng, KernelSpec.szego())
            rep = wandering_span_check(T, S)
            assert rep.verdict == "pass" and rep.dim_span == rep.dim_S
            assert rep.containment_residual <= 1e-8

    @pytest.mark.parametrize("alpha", [2.0, 3.0])
    def test_bergman_from_z(self, alpha):
        T = shift(KernelSpec.bergman(alpha), 8)
        S = span_closure_invariant(T, np.eye(9)[:, 1])
        rep = wandering_span_check(T, S)
        assert rep.dim_W == 1 and rep.verdict == "pass"
        assert rep.rank_growth == list(range(1, 9)) + [8]

    def test_exploratory_has_no_verdict(self):
        T = shift(KernelSpec.bergman(5.0), 6)
        S = span_closure_invariant(T, np.eye(7)[:, 1])
        rep = wandering_span_check(T, S, exploratory=True)
        assert rep.verdict == "exploratory" and rep.passed
        assert rep.to_dict()["dim_S"] == 6

    def test_failure_is_reported(self):
        # S = span{e0} is invariant for diag(0.5, 0.25) but so is T S = S: W = 0
        T = np.diag([0.5, 0.25])
        rep = wandering_span_check(T, Subspace(np.eye(2)[:, :1]))
        assert rep.dim_W == 0 and rep.verdict == "fail" and not rep.passed


@pytest.mark.parametrize(
    "spec, expected",
    [
        (KernelSpec.szego(), False),
        (KernelSpec.bergman(2), False),
        (KernelSpec.bergman(3), False),
        (KernelSpec.bergman(3.5), True),
        (KernelSpec.diagonal([1, 0.5]), True),
    ],
)
def test_exploratory_kernel(spec, expected):
    assert is_exploratory_kernel(spec) is expected
