"""Invariant subspaces of a C.0 contraction and their partial-isometry factorization.

For an invariant subspace S with orthonormal basis V the restriction T|S is
again a C.0 contraction, with matrix T_S = V* T V.  Composing the inclusion V
with the model co-isometry of T_S gives a partial isometry Pi with
Pi (M_z) = T Pi and Pi Pi* = P_S.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, EmptyGenerators, NotC0, NotInvariant, NotOrthonormal
from .model import BlockColumnMap, power_blocks, truncation_order
from .numerics import (
    DEFAULT_TOL,
    PartialIsometryReport,
    ToleranceConfig,
    adjoint,
    as_matrix,
    extend_orthonormal,
    is_partial_isometry,
    max_abs,
    orthonormal_range,
    orthonormality_defect,
    psd_sqrt,
    spectral_norm,
)
from .spaces import classify_contraction, nilpotency_index


@dataclass
class Subspace:
    """A subspace of C^n given by an orthonormal column basis (n x k)."""

    basis: np.ndarray

    def __post_init__(self):
        self.basis = as_matrix(self.basis, "subspace basis")

    @classmethod
    def from_basis(cls, columns, tol: ToleranceConfig = DEFAULT_TOL) -> "Subspace":
        B = as_matrix(columns, "subspace basis")
        defect = orthonormality_defect(B)
        if defect > tol.verify_tol:
            raise NotOrthonormal(f"basis columns deviate from orthonormal by {defect:.3e}")
        return cls(B)

    @classmethod
    def span(cls, vectors, tol: ToleranceConfig = DEFAULT_TOL) -> "Subspace":
        """Span of the columns of ``vectors``, orthonormalized."""
        return cls(orthonormal_range(vectors, tol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim in (0, self.ambient_dim)

    @property
    def projection(self) -> np.ndarray:
        P = self.basis @ adjoint(self.basis)
        return 0.5 * (P + adjoint(P))


def _check_dims(T: np.ndarray, S: Subspace) -> None:
    if T.shape != (S.ambient_dim, S.ambient_dim):
        raise DimensionMismatch(f"operator of shape {T.shape} on subspace of C^{S.ambient_dim}")


def span_closure_invariant(T, generators, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Smallest T-invariant subspace containing the generators (columns).

    Block Krylov iteration: T is applied only to the newest orthonormal
    directions, and iteration stops as soon as no new direction appears.
    """
    T = as_matrix(T)
    G = np.asarray(generators, dtype=complex)
    if G.ndim == 1:
        G = G[:, None]
    if G.shape[0] != T.shape[0]:
        raise DimensionMismatch(f"generators of length {G.shape[0]} for operator of size {T.shape[0]}")
    Q = orthonormal_range(G, tol)
    if Q.shape[1] == 0:
        raise EmptyGenerators("all generators vanish")
    new = Q
    while new.shape[1]:
        new = extend_orthonormal(Q, T @ new, tol)
        Q = np.hstack([Q, new])
    return Subspace(Q)


@dataclass
class InvarianceReport:
    verdict: bool
    residual: float


def check_invariant(T, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> InvarianceReport:
    """Residual ||(I - P_S) T V||_max for the basis V of S."""
    T = as_matrix(T)
    _check_dims(T, S)
    V = S.basis
    TV = T @ V
    residual = max_abs(TV - V @ (adjoint(V) @ TV))
    return InvarianceReport(residual <= tol.verify_tol, residual)


def compress(T, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Matrix V* T V of the restriction T|S; S must be invariant."""
    T = as_matrix(T)
    inv = check_invariant(T, S, tol)
    if not inv.verdict:
        raise NotInvariant(f"invariance residual {inv.residual:.3e} exceeds verify_tol {tol.verify_tol:g}")
    return adjoint(S.basis) @ T @ S.basis


def invariant_factorization(T, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> BlockColumnMap:
    """Partial isometry Pi = V o Pi_{T|S} with ran Pi = S, as ambient block columns.

    The defect basis is chosen from the ambient operator V D_S V*, so the
    result does not depend on which orthonormal basis represents S.
    """
    T = as_matrix(T)
    cls = classify_contraction(T, tol)
    if not cls.is_c0:
        raise NotC0(
            f"not a C.0 contraction (norm {cls.operator_norm:.6g}, spectral radius {cls.spectral_radius:.6g})"
        )
    TS = compress(T, S, tol)
    V = S.basis
    n, k = V.shape
    if k == 0:
        return BlockColumnMap(np.zeros((1, n, 0), dtype=complex), 0.0)
    DS = psd_sqrt(np.eye(k) - TS @ adjoint(TS), tol)
    E = adjoint(V) @ orthonormal_range(V @ DS @ adjoint(V), tol)
    M, tail = truncation_order(TS, tol)
    if cls.is_nilpotent:
        # T_S^(M+1) may be rounding noise from the basis of S; keep blocks
        # until T^(M+1) itself vanishes so no noise-level block is dropped
        index = nilpotency_index(T, tol)
        if index - 1 > M:
            M = index - 1
            tail = spectral_norm(np.linalg.matrix_power(TS, M + 1)) ** 2
    # iterate T in ambient coordinates: T V = V T_S holds only up to the
    # invariance residual, and Pi_{m+1} = T Pi_m should hold to rounding
    return BlockColumnMap(power_blocks(T, V @ (DS @ E), M), tail)


@dataclass
class FactorizationReport:
    projection_residual: float
    intertwining_residual: float
    range_residual: float
    partial_isometry: PartialIsometryReport
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.projection_residual <= self.tolerance
            and self.intertwining_residual <= self.tolerance
            and self.range_residual <= self.tolerance
            and self.partial_isometry.verdict
        )

    def to_dict(self) -> dict:
        return {
            "projection_residual": self.projection_residual,
            "intertwining_residual": self.intertwining_residual,
            "range_residual": self.range_residual,
            "partial_isometry": self.partial_isometry.verdict,
            "partial_isometry_deviation": self.partial_isometry.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_factorization(T, S: Subspace, Pi: BlockColumnMap, tol: ToleranceConfig = DEFAULT_TOL) -> FactorizationReport:
    """Check Pi Pi* = P_S, Pi_{m+1} = T Pi_m, ran Pi in S and partial isometry."""
    T = as_matrix(T)
    _check_dims(T, S)
    if Pi.ambient_dim != S.ambient_dim:
        raise DimensionMismatch(f"blocks act into C^{Pi.ambient_dim}, subspace lives in C^{S.ambient_dim}")
    bound = Pi.tail_bound + tol.verify_tol
    P = S.projection
    projection = max_abs(Pi.gram() - P)
    intertwining = max((max_abs(Pi.blocks[m + 1] - T @ Pi.blocks[m]) for m in range(Pi.trunc_order)), default=0.0)
    outside = np.eye(S.ambient_dim) - P
    range_res = max((max_abs(outside @ B) for B in Pi.blocks), default=0.0)
    piso = is_partial_isometry(Pi.flat(), replace(tol, verify_tol=bound))
    return FactorizationReport(projection, intertwining, range_res, piso, bound)


def range_subspace(Pi: BlockColumnMap, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormalized column span of the flattened block map."""
    return Subspace(orthonormal_range(Pi.flat(), tol))


def projection_distance(S1: Subspace, S2: Subspace) -> float:
    return max_abs(S1.projection - S2.projection)
