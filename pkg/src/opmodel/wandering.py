"""Wandering subspaces W = S - T S and the wandering subspace property."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotInvariant
from .invariant import Subspace, check_invariant
from .numerics import DEFAULT_TOL, ToleranceConfig, as_matrix, extend_orthonormal, max_abs, orthonormal_range
from .spaces import KernelSpec


def _require_invariant(T, S, tol):
    inv = check_invariant(T, S, tol)
    if not inv.verdict:
        raise NotInvariant(f"invariance residual {inv.residual:.3e} exceeds verify_tol {tol.verify_tol:g}")


def wandering_subspace(T, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement of T S inside S."""
    T = as_matrix(T)
    _require_invariant(T, S, tol)
    image = Subspace(orthonormal_range(T @ S.basis, tol))
    return Subspace(orthonormal_range(S.projection - image.projection, tol))


@dataclass
class WanderingReport:
    dim_S: int
    dim_W: int
    dim_span: int
    rank_growth: list[int]
    containment_residual: float
    exploratory: bool = False
    basis_W: np.ndarray = field(default=None, repr=False)

    @property
    def verdict(self) -> str:
        if self.exploratory:
            return "exploratory"
        return "pass" if self.dim_span == self.dim_S else "fail"

    @property
    def passed(self) -> bool:
        # exploratory reports carry no claim, so they never fail a run
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        return {
            "dim_S": self.dim_S,
            "dim_W": self.dim_W,
            "dim_span": self.dim_span,
            "rank_growth": list(self.rank_growth),
            "containment_residual": self.containment_residual,
            "verdict": self.verdict,
        }


def wandering_span_check(
    T, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL, exploratory: bool = False
) -> WanderingReport:
    """Dimension of span{T^m W : m >= 0} compared with dim S.

    The span is accumulated until its rank stops growing; once
    span{W, ..., T^m W} is stationary it is T-invariant, so the sequence
    ``rank_growth`` is final.  With ``exploratory=True`` the report states
    dimensions only, without a pass/fail verdict.
    """
    T = as_matrix(T)
    W = wandering_subspace(T, S, tol)
    Q = W.basis
    growth = [Q.shape[1]]
    new = Q
    while new.shape[1]:
        new = extend_orthonormal(Q, T @ new, tol)
        Q = np.hstack([Q, new])
        growth.append(Q.shape[1])
    containment = max_abs(Q - S.projection @ Q)
    return WanderingReport(S.dim, W.dim, Q.shape[1], growth, containment, exploratory, W.basis)


def is_exploratory_kernel(spec: KernelSpec) -> bool:
    """Kernels for which the truncated check cannot support a claim.

    Only the Hardy space and weighted Bergman spaces with alpha <= 3 have the
    wandering subspace property for every invariant subspace.
    """
    if spec.variant == "szego":
        return False
    if spec.variant == "bergman":
        return spec.alpha > 3
    return True
