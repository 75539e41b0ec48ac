"""Partially isometric multipliers from H^2 (x) E into a truncated analytic space.

When T is multiplication by z, the factorization Pi of a shift-invariant
subspace intertwines the Hardy shift with T, so it is multiplication by an
operator-valued polynomial Theta.  Theta is read off from the first block:
Pi_0 eta = Theta(.) eta as an element of the target space.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeOverflowWarning, DimensionMismatch, ParseError, PointOutsideDisc
from .invariant import Subspace, invariant_factorization
from .model import BlockColumnMap, complex_matrix_from_json, complex_matrix_to_json
from .numerics import DEFAULT_TOL, PartialIsometryReport, ToleranceConfig, adjoint, is_partial_isometry, max_abs
from .spaces import KernelSpec, TruncatedSpace, shift_matrix


@dataclass
class Multiplier:
    """Theta(w) = sum_k taylor[k] w^k with ``taylor`` of shape (N+1, d, e)."""

    space: TruncatedSpace
    taylor: np.ndarray

    def __post_init__(self):
        self.taylor = np.asarray(self.taylor, dtype=complex)
        expected = (self.space.degree + 1, self.space.coeff_dim)
        if self.taylor.ndim != 3 or self.taylor.shape[:2] != expected:
            raise DimensionMismatch(f"taylor array of shape {self.taylor.shape}, expected {expected} + (e,)")

    @property
    def source_dim(self) -> int:
        return self.taylor.shape[2]

    @property
    def coeff_dim(self) -> int:
        return self.space.coeff_dim

    @property
    def degree(self) -> int:
        return self.space.degree

    def scaled(self, factor: complex) -> "Multiplier":
        return Multiplier(self.space, factor * self.taylor)

    def to_json(self) -> dict:
        return {
            "source_dim": self.source_dim,
            "coeff_dim": self.coeff_dim,
            "degree": self.degree,
            "kernel": self.space.kernel.to_json(),
            "taylor": [complex_matrix_to_json(t) for t in self.taylor],
        }

    @classmethod
    def from_json(cls, obj: dict, space: TruncatedSpace | None = None) -> "Multiplier":
        try:
            if space is None:
                kernel = KernelSpec.from_json(obj.get("kernel", {"type": "szego"}))
                space = TruncatedSpace(kernel, int(obj["degree"]), int(obj["coeff_dim"]))
            e = int(obj["source_dim"])
            taylor = np.array([complex_matrix_from_json(t) for t in obj["taylor"]], dtype=complex)
            taylor = taylor.reshape(space.degree + 1, space.coeff_dim, e)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad multiplier: {exc}") from exc
        return cls(space, taylor)


def extract_multiplier(
    space: TruncatedSpace, S: Subspace, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[Multiplier, BlockColumnMap]:
    """Factorize S under the shift and read Theta off the first block column."""
    Pi = invariant_factorization(shift_matrix(space), S, tol)
    taylor = space.to_taylor(Pi.blocks[0])
    return Multiplier(space, taylor.reshape(space.degree + 1, space.coeff_dim, Pi.defect_dim)), Pi


def multiplier_eval(theta: Multiplier, w: complex) -> np.ndarray:
    """Theta(w) by Horner's rule."""
    if abs(w) >= 1:
        warnings.warn("multiplier evaluated outside the open unit disc", RuntimeWarning, stacklevel=2)
    acc = np.zeros(theta.taylor.shape[1:], dtype=complex)
    for coeff in theta.taylor[::-1]:
        acc = acc * w + coeff
    return acc


def multiplier_apply(theta: Multiplier, f, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Theta f truncated to degree N, in the target's orthonormal coordinates.

    ``f`` holds the Hardy coefficients, shape (N+1, e) (or fewer rows).
    Products of degree above N are dropped; a :class:`DegreeOverflowWarning`
    is issued if any of them exceeds trunc_tol.
    """
    N, e = theta.degree, theta.source_dim
    f = np.asarray(f, dtype=complex)
    if f.ndim == 1:
        f = f.reshape(-1, e)
    if f.shape[1] != e or f.shape[0] > N + 1:
        raise DimensionMismatch(f"Hardy vector of shape {f.shape}, expected at most ({N + 1}, {e})")
    full = np.zeros((N + 1, e), dtype=complex)
    full[: f.shape[0]] = f
    # g_k = sum_j Theta_j f_{k-j} for k = 0..2N
    g = np.zeros((2 * N + 1, theta.coeff_dim), dtype=complex)
    for j in range(N + 1):
        g[j : j + N + 1] += full @ theta.taylor[j].T
    overflow = max_abs(g[N + 1 :])
    if overflow > tol.trunc_tol:
        warnings.warn(f"discarded terms above degree {N} of size {overflow:.3e}", DegreeOverflowWarning, stacklevel=2)
    return theta.space.from_taylor(g[: N + 1])


def multiplication_operator(theta: Multiplier, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """M_Theta on the Hardy basis z^m (x) eta_j, columns ordered m-major."""
    N, e = theta.degree, theta.source_dim
    cols = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegreeOverflowWarning)
        for m in range(N + 1):
            for j in range(e):
                f = np.zeros((N + 1, e), dtype=complex)
                f[m, j] = 1.0
                cols.append(multiplier_apply(theta, f, tol))
    if not cols:
        return np.zeros((theta.space.dim, 0), dtype=complex)
    return np.column_stack(cols)


@dataclass
class MultiplierReport:
    projection_residual: float
    range_residual: float
    agreement: float
    partial_isometry: PartialIsometryReport
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.projection_residual <= self.tolerance
            and self.range_residual <= self.tolerance
            and self.agreement <= self.tolerance
            and self.partial_isometry.verdict
        )

    def to_dict(self) -> dict:
        return {
            "projection_residual": self.projection_residual,
            "range_residual": self.range_residual,
            "multiplier_agreement": self.agreement,
            "partial_isometry": self.partial_isometry.verdict,
            "partial_isometry_deviation": self.partial_isometry.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_multiplier(
    space: TruncatedSpace,
    S: Subspace,
    theta: Multiplier,
    tol: ToleranceConfig = DEFAULT_TOL,
    Pi: BlockColumnMap | None = None,
) -> MultiplierReport:
    """Check M_Theta M_Theta* = P_S, ran M_Theta in S, and M_Theta = Pi."""
    if theta.space != space or S.ambient_dim != space.dim:
        raise DimensionMismatch("multiplier, subspace and space disagree")
    if Pi is None:
        Pi = invariant_factorization(shift_matrix(space), S, tol)
    if Pi.defect_dim != theta.source_dim:
        raise DimensionMismatch(f"multiplier source dimension {theta.source_dim} vs defect dimension {Pi.defect_dim}")
    Mt = multiplication_operator(theta, tol)
    P = S.projection
    projection = max_abs(Mt @ adjoint(Mt) - P)
    range_res = max_abs(Mt - P @ Mt)
    agreement = max_abs(Mt - Pi.flat(space.degree + 1)[:, : Mt.shape[1]])
    if Pi.trunc_order > space.degree:
        # blocks beyond degree N must vanish for Pi to be a multiplication operator
        agreement = max(agreement, max_abs(Pi.blocks[space.degree + 1 :]))
    piso = is_partial_isometry(Mt, tol)
    return MultiplierReport(projection, range_res, agreement, piso, tol.verify_tol)


@dataclass
class KernelIdentityReport:
    """Coefficient mismatches r_m of the adjoint kernel identity.

    ``bounds`` is the guard-band schedule verify_tol + ||zeta|| |w|^(N+1-m).
    ``tail_bounds`` is the triangle-inequality bound on the dropped terms,
    verify_tol + sum_{k > N-m} |w|^(k+m) ||Theta_k^* zeta||, which also
    accounts for the size of the Taylor coefficients.
    """

    w: complex
    residuals: np.ndarray = field(repr=False)
    bounds: np.ndarray = field(repr=False)
    tail_bounds: np.ndarray = field(repr=False)

    @property
    def max_excess(self) -> float:
        return float(np.max(self.residuals - self.bounds))

    @property
    def passed(self) -> bool:
        return bool(np.all(self.residuals <= self.bounds))

    @property
    def within_tail_bound(self) -> bool:
        return bool(np.all(self.residuals <= self.tail_bounds))

    def to_dict(self) -> dict:
        return {
            "w": [self.w.real, self.w.imag],
            "max_residual": float(self.residuals.max()),
            "max_excess": self.max_excess,
            "within_tail_bound": self.within_tail_bound,
            "passed": self.passed,
        }


def adjoint_kernel_identity_check(
    space: TruncatedSpace,
    S: Subspace,
    theta: Multiplier,
    Pi: BlockColumnMap,
    w: complex,
    zeta,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> KernelIdentityReport:
    """Compare Pi_m^* (K_N(., w) (x) zeta) with conj(w)^m Theta(w)^* zeta for m <= N.

    The truncated kernel section loses all degrees above N, so coefficient m
    is accepted within verify_tol + ||zeta|| |w|^(N+1-m).
    """
    w = complex(w)
    if abs(w) >= 1:
        raise PointOutsideDisc(f"|w| = {abs(w):g} >= 1")
    if S.ambient_dim != space.dim or Pi.ambient_dim != space.dim:
        raise DimensionMismatch("subspace or block map does not live in the given space")
    zeta = np.asarray(zeta, dtype=complex).reshape(space.coeff_dim)
    N = space.degree
    section = space.kernel_section(w, zeta).reshape(-1)
    rhs = adjoint(multiplier_eval(theta, w)) @ zeta
    coeff_sizes = np.array([np.linalg.norm(adjoint(t) @ zeta) for t in theta.taylor])
    residuals = np.empty(N + 1)
    tail = np.empty(N + 1)
    for m in range(N + 1):
        lhs = adjoint(Pi.block(m)) @ section
        residuals[m] = np.linalg.norm(lhs - np.conj(w) ** m * rhs)
        k = np.arange(N + 1 - m, N + 1)
        tail[m] = np.sum(coeff_sizes[k] * abs(w) ** (k + m))
    znorm = float(np.linalg.norm(zeta))
    bounds = tol.verify_tol + znorm * abs(w) ** (N + 1 - np.arange(N + 1))
    return KernelIdentityReport(w, residuals, bounds, tol.verify_tol + tail)
