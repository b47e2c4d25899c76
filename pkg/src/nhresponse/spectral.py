"""Biorthogonal spectral decomposition and pseudo-metric machinery.

Dense complex matrices are plain ``numpy`` arrays of shape ``(dim, dim)``.
Eigensystems of a non-Hermitian matrix come with paired right/left
eigenvectors normalized to ``<L_a|R_b> = delta_ab``; from those one builds
the canonical positive-definite metric ``eta = sum_a |L_a><L_a|`` and the
similarity transform to the isospectral Hermitian partner
``h = eta^{1/2} H eta^{-1/2}``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComplexSpectrumError,
    ExceptionalPointError,
    NonFiniteError,
    NotHermitianError,
    NotPositiveDefiniteError,
)

TOL_BIORTHO = 1e-10
TOL_METRIC = 1e-10
TOL_REAL = 1e-9
TOL_HERM = 1e-10
COND_MAX = 1e8

__all__ = [
    "BiorthoSystem",
    "PseudoMetric",
    "FrameDirection",
    "as_square_matrix",
    "is_hermitian",
    "hermitize",
    "eig_biortho",
    "pseudo_metric",
    "isospectral_map",
    "transform_observable",
    "propagator",
]


def as_square_matrix(M) -> np.ndarray:
    """Validate and coerce input to a finite square complex matrix."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M.view(float))):
        raise NonFiniteError("matrix contains NaN or Inf entries")
    return M


def is_hermitian(M, tol: float = TOL_HERM) -> bool:
    """Frobenius test ``||M - M^dag|| <= tol * max(1, ||M||)``."""
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, np.linalg.norm(M))
    return np.linalg.norm(M - M.conj().T) <= tol * scale


def hermitize(M) -> np.ndarray:
    return 0.5 * (M + np.asarray(M).conj().T)


@dataclass(frozen=True)
class BiorthoSystem:
    """Eigenvalues with biorthonormal right/left eigenvectors.

    ``right[:, a]`` is the ket ``|R_a>`` (unit 2-norm) and ``left[:, a]``
    the ket ``|L_a>``, scaled so that ``<L_a|R_b> = delta_ab``.  As a
    consequence ``sum_a |R_a><L_a| = 1`` holds exactly up to the inversion
    roundoff tracked by ``condition``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Return ``sum_a xi_a |R_a><L_a|``."""
        return (self.right * self.eigenvalues) @ self.left.conj().T

    def overlaps(self):
        """Overlap matrices ``(S_LR, S_LL, S_RR)`` with ``S_XY = <X_a|Y_b>``."""
        s_lr = self.left.conj().T @ self.right
        s_ll = self.left.conj().T @ self.left
        s_rr = self.right.conj().T @ self.right
        return s_lr, s_ll, s_rr

    def is_real_spectrum(self, tol: float = TOL_REAL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.eigenvalues))))
        return bool(np.max(np.abs(self.eigenvalues.imag)) <= tol * scale)


@dataclass(frozen=True)
class PseudoMetric:
    """Positive-definite Hermitian metric with cached square roots."""

    eta: np.ndarray
    eta_sqrt: np.ndarray
    eta_inv_sqrt: np.ndarray
    min_eigenvalue: float
    eta_inv: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.eta.shape[0]


class FrameDirection(enum.Enum):
    """Direction of the similarity transform between operator frames."""

    TO_NH_FRAME = "to_nh_frame"          # O -> eta^{-1/2} O eta^{1/2}
    TO_HERMITIAN_FRAME = "to_hermitian"  # O -> eta^{1/2} O eta^{-1/2}


def _eig2x2(M: np.ndarray):
    """Closed-form eigensystem of a 2x2 matrix (no iterative solver noise)."""
    a, b = M[0, 0], M[0, 1]
    c, d = M[1, 0], M[1, 1]
    scale = max(np.abs(M).max(), 1e-300)
    if abs(b) <= 1e-16 * scale and abs(c) <= 1e-16 * scale:
        return np.array([a, d]), np.eye(2, dtype=complex)
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(complex(0.25 * (a - d) ** 2 + b * c))
    ev = np.array([half_tr + disc, half_tr - disc])
    vecs = []
    for lam in ev:
        v1 = np.array([b, lam - a])
        v2 = np.array([lam - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        vecs.append(v)
    return ev, np.stack(vecs, axis=1).astype(complex)


def eig_biortho(M, cond_max: float = COND_MAX) -> BiorthoSystem:
    """Biorthogonal eigendecomposition of a dense complex matrix.

    Eigenvalues are sorted by (Re ascending, Im descending).  Right vectors
    are normalized to unit 2-norm; left vectors come from the rows of the
    inverse eigenvector matrix, so biorthonormality and the resolution of
    unity hold by construction.  ``dim == 2`` uses the closed-form solver.

    Raises
    ------
    ExceptionalPointError
        If the eigenvector matrix condition number exceeds ``cond_max``
        (eigenvector coalescence).
    NonFiniteError
        If the input contains NaN/Inf.
    """
    M = as_square_matrix(M)
    dim = M.shape[0]
    if dim == 1:
        ev = M[0, 0].reshape(1)
        one = np.ones((1, 1), dtype=complex)
        return BiorthoSystem(ev, one, one.copy(), 1.0)
    if dim == 2:
        ev, R = _eig2x2(M)
    else:
        ev, R = np.linalg.eig(M)
    order = np.lexsort((-ev.imag, ev.real))
    ev, R = ev[order], R[:, order]
    R = R / np.linalg.norm(R, axis=0, keepdims=True)
    condition = float(np.linalg.cond(R))
    if not np.isfinite(condition) or condition > cond_max:
        raise ExceptionalPointError(condition, cond_max)
    left = np.linalg.inv(R).conj().T
    return BiorthoSystem(ev, R, left, condition)


def pseudo_metric(system: BiorthoSystem, tol_real: float = TOL_REAL) -> PseudoMetric:
    """Canonical metric ``eta = sum_a |L_a><L_a|`` with cached ``eta^{±1/2}``.

    Requires a real spectrum (a positive-definite metric intertwining
    ``eta H = H^dag eta`` exists only then).

    Raises
    ------
    ComplexSpectrumError
        If any ``|Im xi| > tol_real * max(1, max|xi|)``.
    NotPositiveDefiniteError
        If the Hermitized metric has a non-positive eigenvalue.
    """
    if not system.is_real_spectrum(tol_real):
        worst = system.eigenvalues[np.argmax(np.abs(system.eigenvalues.imag))]
        raise ComplexSpectrumError(
            f"spectrum is not real: eigenvalue {worst} has |Im| beyond tolerance"
        )
    eta = hermitize(system.left @ system.left.conj().T)
    w, U = np.linalg.eigh(eta)
    min_ev = float(w.min())
    if min_ev <= 0.0:
        raise NotPositiveDefiniteError(
            f"metric has minimum eigenvalue {min_ev:.3e} <= 0"
        )
    sqrt_w = np.sqrt(w)
    eta_sqrt = (U * sqrt_w) @ U.conj().T
    eta_inv_sqrt = (U / sqrt_w) @ U.conj().T
    eta_inv = (U / w) @ U.conj().T
    return PseudoMetric(eta, eta_sqrt, eta_inv_sqrt, min_ev, eta_inv)


def isospectral_map(H, metric: PseudoMetric, tol: float = TOL_METRIC) -> np.ndarray:
    """Similarity transform ``h = eta^{1/2} H eta^{-1/2}`` to the Hermitian frame.

    The result is verified to be Hermitian within ``tol`` (relative) and
    Hermitized before returning; a failure signals a metric inconsistent
    with ``H``.
    """
    H = as_square_matrix(H)
    h = metric.eta_sqrt @ H @ metric.eta_inv_sqrt
    scale = max(1.0, np.linalg.norm(h))
    residual = np.linalg.norm(h - h.conj().T)
    if residual > tol * scale:
        raise NotHermitianError(
            f"isospectral image has Hermiticity residual {residual:.3e} "
            f"(tolerance {tol * scale:.3e}); metric inconsistent with H"
        )
    return hermitize(h)


def transform_observable(O, metric: PseudoMetric, direction: FrameDirection) -> np.ndarray:
    """Move an operator between the NH and Hermitian frames.

    ``TO_NH_FRAME`` returns ``eta^{-1/2} O eta^{1/2}`` (the tilde operator);
    ``TO_HERMITIAN_FRAME`` returns ``eta^{1/2} O eta^{-1/2}``.  The two are
    mutually inverse.
    """
    O = as_square_matrix(O)
    if O.shape[0] != metric.dim:
        raise ValueError(
            f"operator dimension {O.shape[0]} does not match metric dimension {metric.dim}"
        )
    if direction is FrameDirection.TO_NH_FRAME:
        return metric.eta_inv_sqrt @ O @ metric.eta_sqrt
    if direction is FrameDirection.TO_HERMITIAN_FRAME:
        return metric.eta_sqrt @ O @ metric.eta_inv_sqrt
    raise ValueError(f"unknown direction {direction!r}")


def propagator(system: BiorthoSystem, t: float) -> np.ndarray:
    """Time evolution ``exp(-iHt) = sum_a e^{-i xi_a t} |R_a><L_a|``."""
    phases = np.exp(-1j * system.eigenvalues * t)
    return (system.right * phases) @ system.left.conj().T
