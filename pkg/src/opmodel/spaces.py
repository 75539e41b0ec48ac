"""Truncated analytic Hilbert spaces with diagonal reproducing kernels.

A diagonal kernel has the form K(z, w) = sum_m c_m (z conj(w))^m with all
c_m > 0, so the monomials are orthogonal with squared norms h_m = 1/c_m.
Vectors are stored in the orthonormal basis e_m (x) e_j with
e_m = z^m / sqrt(h_m).  The coordinate index of e_m (x) e_j is ``m*d + j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, InvalidAlpha, ParseError
from .numerics import DEFAULT_TOL, ToleranceConfig, as_matrix, require_square, spectral_norm


@dataclass(frozen=True)
class KernelSpec:
    """One of ``szego``, ``bergman`` (with ``alpha``) or ``diagonal`` (with ``h``)."""

    variant: str
    alpha: float | None = None
    h: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.variant == "szego":
            return
        if self.variant == "bergman":
            if self.alpha is None or not np.isfinite(self.alpha) or self.alpha <= 1:
                raise InvalidAlpha(f"bergman kernel needs alpha > 1, got {self.alpha!r}")
            return
        if self.variant == "diagonal":
            if not self.h:
                raise InputError("diagonal kernel needs a nonempty h sequence")
            h = tuple(float(x) for x in self.h)
            if not all(np.isfinite(x) and x > 0 for x in h):
                raise InputError("diagonal kernel weights h_m must be finite and > 0")
            object.__setattr__(self, "h", h)
            return
        raise InputError(f"unknown kernel variant {self.variant!r}")

    @classmethod
    def szego(cls) -> "KernelSpec":
        return cls("szego")

    @classmethod
    def bergman(cls, alpha: float) -> "KernelSpec":
        return cls("bergman", alpha=float(alpha))

    @classmethod
    def diagonal(cls, h: Sequence[float]) -> "KernelSpec":
        return cls("diagonal", h=tuple(h))

    def to_json(self) -> dict:
        if self.variant == "szego":
            return {"type": "szego"}
        if self.variant == "bergman":
            return {"type": "bergman", "alpha": self.alpha}
        return {"type": "diagonal", "h": list(self.h)}

    @classmethod
    def from_json(cls, obj: dict) -> "KernelSpec":
        try:
            kind = obj["type"]
            if kind == "szego":
                return cls.szego()
            if kind == "bergman":
                return cls.bergman(obj["alpha"])
            if kind == "diagonal":
                return cls.diagonal(obj["h"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad kernel spec {obj!r}: {exc}") from exc
        raise ParseError(f"unknown kernel type {kind!r}")

    def describe(self) -> str:
        if self.variant == "bergman":
            return f"bergman(alpha={self.alpha:g})"
        return self.variant


def kernel_coefficients(spec: KernelSpec, N: int) -> np.ndarray:
    """Taylor coefficients c_0..c_N of K(z, w) in powers of z conj(w)."""
    if N < 0:
        raise InputError(f"degree must be >= 0, got {N}")
    if spec.variant == "szego":
        return np.ones(N + 1)
    if spec.variant == "bergman":
        # recurrence instead of gamma ratios to avoid overflow
        c = np.empty(N + 1)
        c[0] = 1.0
        for m in range(N):
            c[m + 1] = c[m] * (m + spec.alpha) / (m + 1)
        return c
    if len(spec.h) < N + 1:
        raise InputError(f"diagonal kernel has {len(spec.h)} weights, need {N + 1}")
    return 1.0 / np.asarray(spec.h[: N + 1])


def monomial_norms_sq(spec: KernelSpec, N: int) -> np.ndarray:
    """h_m = ||z^m||^2 for m = 0..N."""
    if spec.variant == "diagonal":
        kernel_coefficients(spec, N)
        return np.asarray(spec.h[: N + 1])
    return 1.0 / kernel_coefficients(spec, N)


def kernel_eval(spec: KernelSpec, N: int, z: complex, w: complex) -> complex:
    """Truncated kernel sum_{m<=N} c_m (z conj(w))^m."""
    if abs(z) >= 1 or abs(w) >= 1:
        warnings.warn("kernel evaluated outside the open unit disc", RuntimeWarning, stacklevel=2)
    c = kernel_coefficients(spec, N)
    t = complex(z) * np.conj(complex(w))
    # Horner in t
    acc = 0j
    for cm in c[::-1]:
        acc = acc * t + cm
    return complex(acc)


@dataclass(frozen=True)
class TruncatedSpace:
    """Polynomials of degree <= ``degree`` with coefficients in C^``coeff_dim``."""

    kernel: KernelSpec
    degree: int
    coeff_dim: int = 1

    def __post_init__(self):
        if self.degree < 0 or self.coeff_dim < 1:
            raise InputError("degree must be >= 0 and coeff_dim >= 1")
        kernel_coefficients(self.kernel, self.degree)

    @property
    def dim(self) -> int:
        return (self.degree + 1) * self.coeff_dim

    @property
    def norms_sq(self) -> np.ndarray:
        return monomial_norms_sq(self.kernel, self.degree)

    @property
    def coefficients(self) -> np.ndarray:
        return kernel_coefficients(self.kernel, self.degree)

    def from_taylor(self, coeffs) -> np.ndarray:
        """Ambient orthonormal coordinates of a polynomial given by Taylor coefficients.

        ``coeffs`` has shape ``(k, d)`` or ``(k,)`` when d == 1, with k <= N+1.
        """
        a = np.asarray(coeffs, dtype=complex)
        if a.ndim == 1:
            if self.coeff_dim != 1:
                a = a.reshape(-1, self.coeff_dim)
            else:
                a = a[:, None]
        if a.ndim != 2 or a.shape[1] != self.coeff_dim:
            raise InputError(f"Taylor coefficients must have {self.coeff_dim} components per degree")
        if a.shape[0] > self.degree + 1:
            raise InputError(f"polynomial degree {a.shape[0] - 1} exceeds truncation degree {self.degree}")
        full = np.zeros((self.degree + 1, self.coeff_dim), dtype=complex)
        full[: a.shape[0]] = a
        return (full * np.sqrt(self.norms_sq)[:, None]).reshape(-1)

    def to_taylor(self, x) -> np.ndarray:
        """Inverse of :meth:`from_taylor`; returns shape ``(N+1, d, ...)``."""
        x = np.asarray(x, dtype=complex)
        blocks = x.reshape((self.degree + 1, self.coeff_dim) + x.shape[1:])
        scale = np.sqrt(self.norms_sq).reshape((-1,) + (1,) * (blocks.ndim - 1))
        return blocks / scale

    def kernel_section(self, w: complex, zeta) -> np.ndarray:
        """Ambient coordinates of K_N(., w) (x) zeta; degree-m block is sqrt(c_m) conj(w)^m zeta."""
        zeta = np.asarray(zeta, dtype=complex).reshape(self.coeff_dim)
        powers = np.conj(complex(w)) ** np.arange(self.degree + 1)
        return (np.sqrt(self.coefficients) * powers)[:, None] * zeta[None, :]

    def to_json(self) -> dict:
        return {"kernel": self.kernel.to_json(), "degree": self.degree, "coeff_dim": self.coeff_dim}

    @classmethod
    def from_json(cls, obj: dict) -> "TruncatedSpace":
        try:
            return cls(KernelSpec.from_json(obj["kernel"]), int(obj["degree"]), int(obj.get("coeff_dim", 1)))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad space descriptor: {exc}") from exc


def shift_weights(space: TruncatedSpace) -> np.ndarray:
    h = space.norms_sq
    return np.sqrt(h[1:] / h[:-1])


def shift_matrix(space: TruncatedSpace) -> np.ndarray:
    """Multiplication by z on the truncated space, in the orthonormal basis.

    e_m (x) e_j maps to sqrt(h_{m+1}/h_m) e_{m+1} (x) e_j; the top degree maps to 0.
    """
    S = np.diag(shift_weights(space), -1) if space.degree else np.zeros((1, 1))
    return np.kron(S, np.eye(space.coeff_dim)).astype(complex)


@dataclass
class Classification:
    is_contraction: bool
    is_c0: bool
    is_nilpotent: bool
    spectral_radius: float
    operator_norm: float

    def to_dict(self) -> dict:
        return {
            "is_contraction": self.is_contraction,
            "is_c0": self.is_c0,
            "is_nilpotent": self.is_nilpotent,
            "spectral_radius": self.spectral_radius,
            "operator_norm": self.operator_norm,
        }


def nilpotency_index(T, tol: ToleranceConfig = DEFAULT_TOL) -> int | None:
    """Least k with ||T^k|| <= rank_tol, or None if T^n is not negligible."""
    T = as_matrix(T)
    n = T.shape[0]
    if n == 0:
        return 0
    scale = max(1.0, spectral_norm(T)) ** n
    P = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        P = T @ P
        if spectral_norm(P) <= tol.rank_tol * scale:
            return k
    return None


def classify_contraction(T, tol: ToleranceConfig = DEFAULT_TOL) -> Classification:
    """Contraction and C.0 status of a square matrix.

    In finite dimension T*^m -> 0 strongly iff the spectral radius is < 1.
    Nilpotency is decided from matrix powers: eigenvalues of a rotated
    Jordan block are only accurate to about eps^(1/n).
    """
    T = as_matrix(T)
    require_square(T)
    norm = spectral_norm(T)
    is_contraction = norm <= 1.0 + tol.verify_tol
    nilpotent = nilpotency_index(T, tol) is not None
    if nilpotent or T.shape[0] == 0:
        rho = 0.0
    else:
        rho = float(np.max(np.abs(np.linalg.eigvals(T))))
    is_c0 = is_contraction and rho < 1.0 - tol.rank_tol
    return Classification(is_contraction, is_c0, nilpotent, rho, norm)


@dataclass
class GramReport:
    verdict: bool
    min_eigenvalue: float
    gram: np.ndarray
    has_duplicates: bool

    def to_dict(self) -> dict:
        return {
            "passed": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "num_points": int(self.gram.shape[0]),
            "has_duplicates": self.has_duplicates,
        }


def gram_psd_check(spec: KernelSpec, N: int, points, tol: ToleranceConfig = DEFAULT_TOL) -> GramReport:
    """Positivity of the Gram matrix G_ij = K_N(z_i, z_j)."""
    pts = [complex(p) for p in points]
    n = len(pts)
    G = np.empty((n, n), dtype=complex)
    for i, zi in enumerate(pts):
        for j, zj in enumerate(pts):
            G[i, j] = kernel_eval(spec, N, zi, zj)
    assert np.allclose(G, G.conj().T, rtol=0, atol=1e-14 * max(1.0, np.abs(G).max(initial=0))), "Gram matrix not Hermitian"
    dup = len(set(pts)) < n
    min_eig = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[0]) if n else 0.0
    return GramReport(min_eig >= -tol.verify_tol, min_eig, G, dup)
