"""Dense complex linear algebra with explicit tolerances.

Every routine here is a pure function of its inputs.  Decompositions use
LAPACK through numpy, which is deterministic for a fixed machine and build.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian, NotOrthonormal, NotPSD, NotSquare, ToleranceWarning

# Components smaller than this fraction of the largest one are treated as
# rounding noise when fixing the phase of a basis vector.
PHASE_RTOL = 1e-8


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances used throughout the package.

    rank_tol: singular values at or below it count as zero.
    verify_tol: acceptance threshold for verification residuals.
    trunc_tol: acceptance threshold for discarded series tails.
    max_order: cap on the truncation order of block-column maps.
    """

    rank_tol: float = 1e-10
    verify_tol: float = 1e-8
    trunc_tol: float = 1e-12
    max_order: int = 10_000

    def __post_init__(self):
        for name in ("rank_tol", "verify_tol", "trunc_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")
        if self.rank_tol > self.verify_tol:
            warnings.warn(
                f"rank_tol={self.rank_tol:g} exceeds verify_tol={self.verify_tol:g}",
                ToleranceWarning,
                stacklevel=3,
            )


DEFAULT_TOL = ToleranceConfig()


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a 2-D complex array, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def max_abs(A) -> float:
    """Max-entry norm; 0 for empty arrays."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A)))


def adjoint(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def require_square(A: np.ndarray, name: str = "operator") -> None:
    if A.shape[0] != A.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {A.shape}")


def psd_sqrt(A, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Hermitian positive semidefinite square root of ``A``.

    Eigenvalues in ``[-rank_tol, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSD`.
    """
    A = as_matrix(A)
    require_square(A, "psd_sqrt argument")
    asym = max_abs(A - adjoint(A))
    if asym > tol.verify_tol:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds verify_tol {tol.verify_tol:g}")
    if A.shape[0] == 0:
        return A.copy()
    H = 0.5 * (A + adjoint(A))
    evals, evecs = np.linalg.eigh(H)
    if evals[0] < -tol.rank_tol:
        raise NotPSD(f"eigenvalue {evals[0]:.3e} below -rank_tol {tol.rank_tol:g}")
    root = np.sqrt(np.clip(evals, 0.0, None))
    S = (evecs * root) @ adjoint(evecs)
    return 0.5 * (S + adjoint(S))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible component is real positive."""
    mags = np.abs(v)
    if mags.size == 0 or mags.max() == 0:
        return v
    idx = int(np.argmax(mags > PHASE_RTOL * mags.max()))
    return v * (np.conj(v[idx]) / mags[idx])


def _canonical_cluster(U: np.ndarray) -> np.ndarray:
    # U has orthonormal columns spanning a degenerate singular subspace.  The
    # QR factorisation of U^H yields the lower-trapezoidal orthonormal basis of
    # the same span, which depends only on the span itself up to phases.
    Q, _ = np.linalg.qr(adjoint(U))
    return U @ Q


def orthonormal_range(A, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``A``.

    Columns are ordered by descending singular value.  Singular values that
    agree to within ``verify_tol`` are treated as tied; a tied block is
    replaced by its lower-trapezoidal basis.  Each column is then rotated so
    its first non-negligible entry is real positive.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > tol.rank_tol))
    U, s = U[:, :rank], s[:rank]
    cols = []
    start = 0
    while start < rank:
        stop = start + 1
        while stop < rank and s[stop - 1] - s[stop] <= tol.verify_tol:
            stop += 1
        block = U[:, start:stop]
        if stop - start > 1:
            block = _canonical_cluster(block)
        cols.extend(fix_phase(block[:, j]) for j in range(block.shape[1]))
        start = stop
    if not cols:
        return np.zeros((n, 0), dtype=complex)
    return np.column_stack(cols)


def extend_orthonormal(Q: np.ndarray, V, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal directions of ``V`` not already in ``span(Q)``.

    Uses two passes of block Gram-Schmidt against ``Q``; the remainder is
    rank-decided by :func:`orthonormal_range`.
    """
    V = as_matrix(V)
    if Q.shape[1]:
        for _ in range(2):
            V = V - Q @ (adjoint(Q) @ V)
    return orthonormal_range(V, tol)


def orthonormality_defect(B) -> float:
    B = as_matrix(B)
    return max_abs(adjoint(B) @ B - np.eye(B.shape[1]))


def projection_from_basis(B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection ``B B*`` onto the span of orthonormal columns ``B``."""
    B = as_matrix(B)
    defect = orthonormality_defect(B)
    if defect > tol.verify_tol:
        raise NotOrthonormal(f"columns deviate from orthonormal by {defect:.3e}")
    P = B @ adjoint(B)
    return 0.5 * (P + adjoint(P))


@dataclass
class PartialIsometryReport:
    verdict: bool
    singular_values: np.ndarray = field(repr=False)
    max_deviation: float
    identity_residual: float  # ||A A* A - A||_max

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_deviation": self.max_deviation,
            "identity_residual": self.identity_residual,
            "singular_values": [float(x) for x in self.singular_values],
        }


def is_partial_isometry(A, tol: ToleranceConfig = DEFAULT_TOL) -> PartialIsometryReport:
    """Decide whether every singular value of ``A`` is within verify_tol of 0 or 1."""
    A = as_matrix(A)
    if A.size == 0:
        return PartialIsometryReport(True, np.zeros(0), 0.0, 0.0)
    s = np.linalg.svd(A, compute_uv=False)
    deviation = float(np.max(np.minimum(s, np.abs(s - 1.0))))
    residual = max_abs(A @ adjoint(A) @ A - A)
    return PartialIsometryReport(deviation <= tol.verify_tol, s, deviation, residual)


def spectral_norm(A) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))
