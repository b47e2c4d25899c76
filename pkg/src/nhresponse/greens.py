"""Causal and Matsubara Green's functions under the supported frameworks.

The same quasiparticle Hamiltonian admits different prescriptions:

* ``STANDARD`` (dissipative interacting theory): ``G_A = G_R^dag`` and the
  anti-Hermitian part of the Hamiltonian is accompanied by ``sgn(omega_n)``
  on the Matsubara axis.
* ``PHQM`` (pseudo-Hermitian quantum mechanics): ``G_A = eta^{-1} G_R^dag
  eta = (omega - H - i*gamma)^{-1}``; only the uniform decay rate ``gamma``
  picks up ``sgn(omega_n)``.
* ``POSTSELECTED``: no Green's functions here; it enters through
  expectation values and closed-form transport oracles only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    MissingMetricError,
    SingularMatrixError,
    StabilityError,
)
from .spectral import PseudoMetric, as_square_matrix, is_hermitian

__all__ = [
    "FrameworkVariant",
    "Framework",
    "g_retarded",
    "g_advanced",
    "g_matsubara",
    "spectral_function",
    "action_kernel",
    "matsubara_kernel_sum",
    "fermi",
]


class FrameworkVariant(enum.Enum):
    STANDARD = "standard"
    PHQM = "phqm"
    POSTSELECTED = "postselected"


@dataclass(frozen=True)
class Framework:
    """Physical prescription plus the uniform decay rate ``gamma >= 0``.

    ``gamma`` is a genuinely dissipative scattering rate; in the clean PHQM
    limit pass a small regulator (``delta0``, conventionally ``1e-6`` in
    units of the gap) as ``gamma`` wherever a strict ``0+`` appears.
    """

    variant: FrameworkVariant
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @classmethod
    def standard(cls, gamma: float) -> "Framework":
        return cls(FrameworkVariant.STANDARD, gamma)

    @classmethod
    def phqm(cls, gamma: float) -> "Framework":
        return cls(FrameworkVariant.PHQM, gamma)

    @classmethod
    def postselected(cls) -> "Framework":
        return cls(FrameworkVariant.POSTSELECTED, 0.0)

    def require_stable(self, H) -> None:
        """Standard framework: anti-Hermitian part of ``H - i*gamma`` must be
        negative definite (dynamical stability)."""
        if self.variant is not FrameworkVariant.STANDARD:
            return
        H = as_square_matrix(H)
        decay = (H - H.conj().T) / 2j - self.gamma * np.eye(H.shape[0])
        top = float(np.linalg.eigvalsh(decay).max())
        # strictly positive growth is unstable; the marginal Hermitian
        # gamma = 0 case is admitted (poles on the real axis)
        scale = max(1.0, float(np.linalg.norm(H)))
        if top > 1e-12 * scale:
            raise StabilityError(
                f"anti-Hermitian part of H - i*gamma has eigenvalue {top:.3e} > 0; "
                "dynamically unstable in the standard framework"
            )


def _require_greens_framework(fw: Framework):
    if fw.variant is FrameworkVariant.POSTSELECTED:
        raise ValueError("the postselected framework carries no Green's functions")


def g_retarded(H, fw: Framework, omega: float) -> np.ndarray:
    """Retarded resolvent ``(omega - H + i*gamma)^{-1}``.

    Identical for the standard and PHQM frameworks; they differ in the
    advanced function.  With ``gamma == 0`` an ``omega`` sitting exactly on
    a real eigenvalue raises ``SingularMatrixError``.
    """
    _require_greens_framework(fw)
    H = as_square_matrix(H)
    fw.require_stable(H)
    if fw.gamma == 0.0:
        ev = np.linalg.eigvals(H)
        scale = max(1.0, float(np.abs(ev).max()))
        hits = np.abs(omega - ev) <= 1e-12 * scale
        if np.any(hits):
            raise SingularMatrixError(omega, complex(ev[np.argmax(hits)]))
    dim = H.shape[0]
    return np.linalg.inv((omega + 1j * fw.gamma) * np.eye(dim) - H)


def g_advanced(H, fw: Framework, omega: float, eta: PseudoMetric | None = None) -> np.ndarray:
    """Advanced Green's function of the chosen framework.

    Standard: ``G_A = G_R^dag``.  PHQM: ``G_A = eta^{-1} G_R^dag eta``,
    which by the intertwining relation equals ``(omega - H - i*gamma)^{-1}``;
    the metric is required so the caller has established a real spectrum.
    """
    _require_greens_framework(fw)
    gr = g_retarded(H, fw, omega)
    if fw.variant is FrameworkVariant.STANDARD:
        return gr.conj().T
    if eta is None:
        raise MissingMetricError("PHQM advanced Green's function needs the pseudo-metric")
    return eta.eta_inv @ gr.conj().T @ eta.eta


def g_matsubara(h0, Gamma, fw: Framework, n: int, T: float) -> np.ndarray:
    """Matsubara Green's function at ``omega_n = (2n+1) pi T``.

    ``H = h0 + i*Gamma`` with Hermitian ``h0`` and ``Gamma``.  Standard
    framework: dissipative parts carry ``sgn(omega_n)``, giving
    ``(i w_n - h0 - i sgn(w_n) (Gamma - gamma))^{-1}``.  PHQM: only the
    uniform rate does, ``(i w_n - H + i sgn(w_n) gamma)^{-1}``.
    """
    _require_greens_framework(fw)
    h0 = as_square_matrix(h0)
    Gamma = as_square_matrix(Gamma)
    if not is_hermitian(h0) or not is_hermitian(Gamma):
        raise ValueError("h0 and Gamma must be Hermitian")
    if T <= 0:
        raise DomainError("temperature must be positive")
    wn = (2 * n + 1) * math.pi * T
    s = 1.0 if wn > 0 else -1.0
    dim = h0.shape[0]
    eye = np.eye(dim)
    if fw.variant is FrameworkVariant.STANDARD:
        return np.linalg.inv(1j * wn * eye - h0 - 1j * s * (Gamma - fw.gamma * eye))
    H = h0 + 1j * Gamma
    return np.linalg.inv((1j * wn + 1j * s * fw.gamma) * eye - H)


def spectral_function(H, fw: Framework, omega: float) -> float:
    """Trace spectral function ``A(w) = i tr[G_R - G_A]``.

    ``tr G_A`` equals ``conj(tr G_R)`` in both frameworks (for PHQM because
    the metric sandwich is a similarity transform), so the result is real by
    construction; the imaginary residual is asserted below 1e-10.
    """
    gr = g_retarded(H, fw, omega)
    tr = np.trace(gr)
    a = 1j * (tr - np.conj(tr))
    assert abs(a.imag) <= 1e-10 * max(1.0, abs(a.real))
    return float(a.real)


def action_kernel(tau: float, T: float) -> float:
    """Imaginary-time kernel ``T csc(pi T tau)`` multiplying the
    anti-Hermitian part of the action (Fourier pair of ``i sgn(omega_n)``).

    Defined for ``0 < tau < 1/T``.
    """
    if T <= 0:
        raise DomainError("temperature must be positive")
    if not 0.0 < tau < 1.0 / T:
        raise DomainError(f"tau = {tau} outside (0, 1/T) with 1/T = {1.0 / T}")
    return T / math.sin(math.pi * T * tau)


def matsubara_kernel_sum(tau: float, T: float, terms: int = 200_000) -> float:
    """Truncated Matsubara-sum oracle for :func:`action_kernel`.

    Evaluates ``T sum_n i sgn(w_n) e^{-i w_n tau} = 2T sum_{n>=0}
    sin((2n+1) pi T tau)``.  The raw partial sums oscillate, so the tail is
    controlled by averaging them over a window of ``terms`` cutoffs (Cesaro
    mean), with error bounded by ``1/(2*terms*sin^2(pi T tau))``.
    """
    if T <= 0:
        raise DomainError("temperature must be positive")
    if not 0.0 < tau < 1.0 / T:
        raise DomainError(f"tau = {tau} outside (0, 1/T)")
    x = math.pi * T * tau
    n = np.arange(2 * terms)
    partial = np.cumsum(np.sin((2 * n + 1) * x))
    return float(2.0 * T * partial[terms - 1:].mean())


def fermi(omega, T: float):
    """Fermi-Dirac factor ``1/(e^{w/T}+1)``; step function at ``T == 0``."""
    omega = np.asarray(omega, dtype=float)
    if T == 0.0:
        out = np.where(omega < 0.0, 1.0, 0.0)
        return np.where(omega == 0.0, 0.5, out)
    # overflow-safe logistic
    z = omega / T
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out
