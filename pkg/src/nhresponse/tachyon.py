"""The (1+1)-dimensional non-Hermitian Dirac ("tachyon") model.

``H(k) = v_F k sigma_x + Delta sigma_y - i m sigma_z - mu`` with real mass
``Delta`` and imaginary mass ``m``; the effective gap ``Delta^2 - m^2``
separates the gapped, linear and tachyonic regimes.  Besides the model
matrices this module carries the closed-form transport results used as
oracles: the DC conductivities of the three physical prescriptions, the
exact optical-sum value of the isospectral current, and their weak/strong
non-Hermiticity expansions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError, StabilityError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

REGIME_TOL = 1e-12

__all__ = [
    "TachyonParams",
    "Regime",
    "PhaseRegime",
    "DcFormula",
    "OsrFormula",
    "regime",
    "hamiltonian",
    "current_j",
    "current_tilde",
    "isospectral_closed",
    "isospectral_current",
    "sigma_dc_closed",
    "osr_closed",
]


@dataclass(frozen=True)
class TachyonParams:
    """Model parameters; energies in units of ``Delta`` by default."""

    v_f: float = 1.0
    delta: float = 1.0
    m: float = 0.0
    mu: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.v_f <= 0:
            raise ValueError("v_f must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def effective_gap_sq(self) -> float:
        return self.delta**2 - self.m**2


class Regime(enum.Enum):
    GAPPED = "gapped"
    LINEAR = "linear"
    TACHYONIC = "tachyonic"


@dataclass(frozen=True)
class PhaseRegime:
    variant: Regime
    effective_gap_sq: float


def regime(p: TachyonParams) -> PhaseRegime:
    """Classify by the sign of ``Delta^2 - m^2`` (tolerance 1e-12 relative)."""
    gap2 = p.effective_gap_sq
    scale = max(p.delta**2, p.m**2, 1e-300)
    if abs(gap2) <= REGIME_TOL * scale:
        return PhaseRegime(Regime.LINEAR, gap2)
    return PhaseRegime(Regime.GAPPED if gap2 > 0 else Regime.TACHYONIC, gap2)


def _require_gapped(p: TachyonParams, what: str):
    if regime(p).variant is not Regime.GAPPED:
        raise RegimeError(
            f"{what} requires the gapped regime Delta^2 > m^2 "
            f"(got Delta={p.delta}, m={p.m})"
        )


def hamiltonian(k: float, p: TachyonParams) -> np.ndarray:
    """``[[-mu - i m, v_F k - i Delta], [v_F k + i Delta, -mu + i m]]``."""
    return (p.v_f * k * SIGMA_X + p.delta * SIGMA_Y
            - 1j * p.m * SIGMA_Z - p.mu * IDENTITY)


def current_j(p: TachyonParams) -> np.ndarray:
    """Local current of the NH Hamiltonian, ``J = e dH/dk = e v_F sigma_x``
    (k-independent); ``e = 1``."""
    return p.v_f * SIGMA_X


def isospectral_closed(k: float, p: TachyonParams) -> np.ndarray:
    """Hermitian isospectral partner: momentum-dependent rescaling
    ``sqrt((v^2 k^2 + Delta^2 - m^2)/(v^2 k^2 + Delta^2)) (v k sx + Delta sy) - mu``.
    """
    _require_gapped(p, "isospectral Hamiltonian")
    a = p.v_f**2 * k**2 + p.delta**2 - p.m**2
    b = p.v_f**2 * k**2 + p.delta**2
    return (math.sqrt(a / b) * (p.v_f * k * SIGMA_X + p.delta * SIGMA_Y)
            - p.mu * IDENTITY)


def isospectral_current(k: float, p: TachyonParams) -> np.ndarray:
    """Current of the isospectral Hamiltonian, ``j = e d h/dk`` (analytic)."""
    _require_gapped(p, "isospectral current")
    a = p.v_f**2 * k**2 + p.delta**2 - p.m**2
    b = p.v_f**2 * k**2 + p.delta**2
    # d/dk sqrt(a/b) = v^2 k m^2 / (sqrt(a) b^(3/2))
    fp = p.v_f**2 * k * p.m**2 / (math.sqrt(a) * b**1.5)
    return (fp * (p.v_f * k * SIGMA_X + p.delta * SIGMA_Y)
            + math.sqrt(a / b) * p.v_f * SIGMA_X)


def current_tilde(k: float, p: TachyonParams) -> np.ndarray:
    """Transformed current ``e eta^{-1/2} (dh/dk) eta^{1/2}`` in Bloch form.

    ``v~ = v_F (a . sigma)`` with ``a = (v^2 k^2/E^2 + Delta^2 E/E0^3,
    v k Delta (1/E^2 - E/E0^3), -i v k m / E^2)``, ``E^2 = v^2 k^2 + Delta^2
    - m^2`` and ``E0 = E|_{m=0}``.
    """
    _require_gapped(p, "transformed current")
    vk = p.v_f * k
    e2 = vk**2 + p.delta**2 - p.m**2
    e = math.sqrt(e2)
    e0 = math.sqrt(vk**2 + p.delta**2)
    ax = vk**2 / e2 + p.delta**2 * e / e0**3
    ay = vk * p.delta * (1.0 / e2 - e / e0**3)
    az = -1j * vk * p.m / e2
    return p.v_f * (ax * SIGMA_X + ay * SIGMA_Y + az * SIGMA_Z)


class DcFormula(enum.Enum):
    """Closed-form DC conductivity variants (units ``e^2 v_F / (2 pi)``)."""

    STANDARD = "standard"
    PHQM_J = "phqm_j"
    POSTSELECTED = "postselected"
    PHQM_TILDE = "phqm_tilde"                      # exact value
    PHQM_TILDE_EXPANSION = "phqm_tilde_expansion"  # dirty/clean series by gamma >< Delta


def _sigma_dc_tilde_exact(p: TachyonParams) -> float:
    d, m, g = abs(p.delta), p.m, p.gamma
    if abs(g - abs(m)) <= 1e-10 * max(g, abs(m), 1e-300):
        raise RegimeError("exact isospectral DC form is singular at gamma = |m|")
    t1 = g**4 * (g**2 * (2 * d**2 - m**2) + 2 * d**2 * m**2 + m**4) / d
    t2 = -2.0 * math.sqrt(d**2 - m**2) * (g**2 - m**2) ** 3
    inner = (g**10
             + m**8 * (9 * g**2 + 4 * d**2)
             - m**6 * (16 * g**4 + 15 * g**2 * d**2 + 2 * d**4)
             + g**2 * m**4 * (14 * g**4 + 23 * g**2 * d**2 + 6 * d**4)
             - 2 * g**4 * m**2 * (3 * g**4 + 6 * g**2 * d**2 + 4 * d**4)
             - 2 * m**10)
    t3 = (g**2 + d**2 - m**2) ** -1.5 * inner
    return (t1 + t2 + t3) / (g**2 * (g**2 - m**2) ** 3)


def sigma_dc_closed(which: DcFormula, p: TachyonParams) -> float:
    """Closed-form DC conductivity in units ``e^2 v_F / (2 pi)`` at T=0, mu=0."""
    d, m, g = p.delta, p.m, p.gamma
    if which is DcFormula.STANDARD:
        if g <= abs(m):
            raise StabilityError("standard framework requires gamma > |m|")
        return (g**2 - m**2) / (g**2 + d**2 - m**2) ** 1.5
    if which is DcFormula.PHQM_J:
        _require_gapped(p, "PHQM DC conductivity")
        if g <= 0:
            raise RegimeError("PHQM DC conductivity requires gamma > 0")
        return g**2 / (g**2 + d**2 - m**2) ** 1.5
    if which is DcFormula.POSTSELECTED:
        # one-sided step: the measure-zero linear point returns 0
        if m**2 - d**2 <= 0:
            return 0.0
        return 0.5 * math.pi * math.sqrt(m**2 - d**2) / m**2
    if which is DcFormula.PHQM_TILDE:
        _require_gapped(p, "isospectral DC conductivity")
        if g <= 0:
            raise RegimeError("isospectral DC conductivity requires gamma > 0")
        return _sigma_dc_tilde_exact(p)
    if which is DcFormula.PHQM_TILDE_EXPANSION:
        _require_gapped(p, "isospectral DC expansion")
        ad = abs(d)
        if g > ad:  # dirty limit, powers of 1/gamma
            return 1.0 / g + (2 * ad - m**2 / ad - 2 * math.sqrt(d**2 - m**2)) / g**2
        if m == 0.0:
            raise RegimeError("clean expansion is written in powers of gamma^2/m^4; needs m != 0")
        coeff = ((8 * d**4 - 8 * d**2 * m**2 + m**4)
                 / (4 * m**4 * (d**2 - m**2) ** 1.5)
                 - (m**2 + 2 * d**2) / (m**4 * ad))
        return coeff * g**2
    raise ValueError(f"unknown DC formula {which!r}")


class OsrFormula(enum.Enum):
    """Optical-sum closed forms for the isospectral current (units ``e^2 v_F``)."""

    EXACT = "exact"
    WEAK_NH = "weak_nh"        # expansion in mbar^2 at fixed gbar
    STRONG_NH = "strong_nh"    # |mbar| -> 1^- limit at fixed gbar
    CLEAN = "clean"            # gbar -> 0 limit at fixed mbar


def _artanh_real(x: float) -> float:
    # spec'd guard: the real branch is only used strictly inside (-1, 1)
    if abs(x) >= 1.0 - 1e-12:
        raise RegimeError(f"artanh argument |{x}| too close to 1")
    return 0.5 * math.log((1.0 + x) / (1.0 - x))


def osr_closed(p: TachyonParams, which: OsrFormula) -> float:
    """Optical sum rule ``-pi Re chi(0)`` for the transformed current
    (units ``e^2 v_F``), from the exact artanh closed form or one of its
    limits.  ``mbar = m/Delta``, ``gbar = gamma/Delta``.
    """
    _require_gapped(p, "isospectral optical sum")
    d = abs(p.delta)
    mbar = p.m / d
    gbar = p.gamma / d
    if which is OsrFormula.EXACT:
        if gbar <= 0:
            raise RegimeError("exact optical sum requires gamma > 0")
        if abs(mbar) < 1e-6:
            # analytic small-m limit (the exact form is 0/0 here)
            return osr_closed(p, OsrFormula.WEAK_NH)
        m, g = abs(mbar), gbar
        s1 = math.sqrt(1.0 - m**2)
        s2 = math.sqrt(g**2 + 1.0 - m**2)
        gamma_term = g * (2.0 / (s1 + s2) - 1.0 / (1.0 + s2))
        # artanh arguments cross 1 when m > g; the i*pi/2 branch pieces of
        # the first and third term cancel, so evaluate on the complex
        # principal branch and keep the real part
        def atanh_c(x):
            x = complex(x)
            return 0.5 * np.log((1.0 + x) / (1.0 - x))
        s = atanh_c(m / g) + atanh_c(m) - atanh_c(m * s2 / g)
        if abs(s.imag) > 1e-8:
            raise RegimeError("artanh branch mismatch; parameters too close to gamma = |m|")
        return 0.5 * (1.0 + gamma_term + (1.0 / m - m) * float(s.real))
    if which is OsrFormula.WEAK_NH:
        if gbar <= 0:
            raise RegimeError("weak-NH expansion requires gamma > 0")
        root = math.sqrt(gbar**2 + 1.0)
        coeff = (2.0 - 2.0 * root + gbar**2 * (root - gbar)) / (3.0 * gbar**3)
        return 1.0 + coeff * mbar**2
    if which is OsrFormula.STRONG_NH:
        return 1.0 + 1.0 / (2.0 * (1.0 + gbar))
    if which is OsrFormula.CLEAN:
        if mbar == 0.0:
            return 1.0  # (1/m - m) artanh(m) -> 1
        return 0.5 * (1.0 + (1.0 / mbar - mbar) * _artanh_real(mbar))
    raise ValueError(f"unknown OSR formula {which!r}")
