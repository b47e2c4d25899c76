import numpy as np
import pytest

from nhresponse.errors import RegimeError, StabilityError
from nhresponse.spectral import FrameDirection, eig_biortho, pseudo_metric, transform_observable
from nhresponse.tachyon import (
    DcFormula,
    OsrFormula,
    Regime,
    SIGMA_X,
    SIGMA_Y,
    TachyonParams,
    current_j,
    current_tilde,
    hamiltonian,
    isospectral_closed,
    isospectral_current,
    osr_closed,
    regime,
    sigma_dc_closed,
)


def test_hamiltonian_matrix_and_spectrum():
    np.testing.assert_allclose(hamiltonian(0.0, TachyonParams()), SIGMA_Y, atol=1e-15)
    ev = np.linalg.eigvals(hamiltonian(0.0, TachyonParams(m=0.6)))
    np.testing.assert_allclose(np.sort(ev.real), [-0.8, 0.8], atol=1e-12)
    ev = np.linalg.eigvals(hamiltonian(0.0, TachyonParams(m=1.2)))
    np.testing.assert_allclose(np.sort(ev.imag), [-np.sqrt(0.44), np.sqrt(0.44)],
                               atol=1e-12)


def test_current_is_momentum_derivative():
    p = TachyonParams(v_f=1.3, m=0.4, mu=0.2)
    j = current_j(p)
    np.testing.assert_allclose(j, 1.3 * SIGMA_X, atol=1e-15)
    np.testing.assert_allclose(j, j.conj().T, atol=1e-15)
    h = 1e-5
    for k in (0.0, 0.8):
        fd = (hamiltonian(k + h, p) - hamiltonian(k - h, p)) / (2 * h)
        np.testing.assert_allclose(fd, j, atol=1e-8)


def test_regime_classification():
    assert regime(TachyonParams(delta=1.0, m=0.5)).variant is Regime.GAPPED
    assert regime(TachyonParams(delta=1.0, m=1.0)).variant is Regime.LINEAR
    assert regime(TachyonParams(delta=1.0, m=1.5)).variant is Regime.TACHYONIC
    assert regime(TachyonParams(delta=1.0, m=0.5)).effective_gap_sq == pytest.approx(0.75)


def test_isospectral_closed_forms():
    p0 = TachyonParams(m=0.0)
    for k in (0.0, 0.7):
        np.testing.assert_allclose(isospectral_closed(k, p0), hamiltonian(k, p0),
                                   atol=1e-14)
    p = TachyonParams(m=0.6)
    np.testing.assert_allclose(isospectral_closed(0.0, p), 0.8 * SIGMA_Y, atol=1e-14)
    # UV limit: free Dirac fermion
    k = 1e3
    free = k * SIGMA_X + SIGMA_Y
    assert np.linalg.norm(isospectral_closed(k, p) - free) / np.linalg.norm(free) <= 1e-6
    with pytest.raises(RegimeError):
        isospectral_closed(0.0, TachyonParams(m=1.2))


def test_isospectral_spectrum_preserved():
    p = TachyonParams(m=0.6)
    for k in np.linspace(-5, 5, 50):
        a = np.sort(np.linalg.eigvalsh(isospectral_closed(k, p)))
        b = np.sort(np.linalg.eigvals(hamiltonian(k, p)).real)
        np.testing.assert_allclose(a, b, atol=1e-10)


def test_isospectral_current_matches_finite_difference():
    p = TachyonParams(m=0.6)
    h = 1e-6
    for k in (0.0, 0.5, -1.7):
        fd = (isospectral_closed(k + h, p) - isospectral_closed(k - h, p)) / (2 * h)
        np.testing.assert_allclose(isospectral_current(k, p), fd, atol=1e-7)


def test_current_tilde_closed_vs_transform():
    p = TachyonParams(m=0.6)
    np.testing.assert_allclose(current_tilde(0.3, TachyonParams(m=0.0)),
                               SIGMA_X, atol=1e-14)
    for k in (0.5, -1.2, 2.4):
        eta = pseudo_metric(eig_biortho(hamiltonian(k, p)))
        two_path = transform_observable(isospectral_current(k, p), eta,
                                        FrameDirection.TO_NH_FRAME)
        np.testing.assert_allclose(current_tilde(k, p), two_path, atol=1e-9)


def test_commutator_identity():
    # J - v~ = [H, eta^(-1/2) d_k eta^(1/2)] with central differences
    p = TachyonParams(m=0.6)
    h = 1e-5
    for k in (0.5, 1.5):
        H = hamiltonian(k, p)
        sqrt_eta = lambda kk: pseudo_metric(eig_biortho(hamiltonian(kk, p))).eta_sqrt
        eta = pseudo_metric(eig_biortho(H))
        d_tilde = eta.eta_inv_sqrt @ (sqrt_eta(k + h) - sqrt_eta(k - h)) / (2 * h)
        lhs = current_j(p) - current_tilde(k, p)
        rhs = H @ d_tilde - d_tilde @ H
        np.testing.assert_allclose(lhs, rhs, atol=1e-6)


def test_dc_closed_forms_and_constraints():
    p = TachyonParams(m=0.6, gamma=1.5)
    assert sigma_dc_closed(DcFormula.STANDARD, p) == pytest.approx(
        1.89 / 2.89**1.5, rel=1e-12)
    assert sigma_dc_closed(DcFormula.PHQM_J, p) == pytest.approx(
        2.25 / 2.89**1.5, rel=1e-12)
    assert sigma_dc_closed(DcFormula.POSTSELECTED, p) == 0.0
    p_t = TachyonParams(m=1.2, gamma=1.5)
    assert sigma_dc_closed(DcFormula.POSTSELECTED, p_t) == pytest.approx(
        0.5 * np.pi * np.sqrt(0.44) / 1.44, rel=1e-12)
    # stability boundary: numerator vanishes as m -> gamma
    near = sigma_dc_closed(DcFormula.STANDARD,
                           TachyonParams(m=1.5 * (1 - 1e-8), gamma=1.5))
    assert 0 <= near < 1e-7
    with pytest.raises(StabilityError):
        sigma_dc_closed(DcFormula.STANDARD, TachyonParams(m=0.6, gamma=0.5))
    with pytest.raises(RegimeError):
        sigma_dc_closed(DcFormula.PHQM_J, TachyonParams(m=1.2, gamma=1.5))


def test_hermitian_limit_collapse():
    for gamma in (0.4, 0.9, 1.5, 2.2, 4.0):
        p = TachyonParams(m=0.0, gamma=gamma)
        want = gamma**2 / (gamma**2 + 1.0) ** 1.5
        for which in (DcFormula.STANDARD, DcFormula.PHQM_J, DcFormula.PHQM_TILDE):
            assert sigma_dc_closed(which, p) == pytest.approx(want, rel=1e-12)
        assert sigma_dc_closed(DcFormula.POSTSELECTED, p) == 0.0


def test_dc_expansion_series_orders():
    # the truncated series converge at their stated order: the dirty
    # remainder is O(g^-3), the clean remainder O(g^4)
    def err(gamma):
        p = TachyonParams(m=0.6, gamma=gamma)
        return abs(sigma_dc_closed(DcFormula.PHQM_TILDE_EXPANSION, p)
                   - sigma_dc_closed(DcFormula.PHQM_TILDE, p))

    ratio_dirty = err(10.0) / err(20.0)
    assert 5.0 <= ratio_dirty <= 12.0  # ~2^3
    ratio_clean = err(0.05) / err(0.025)
    assert 10.0 <= ratio_clean <= 24.0  # ~2^4


def test_osr_closed_limits():
    assert osr_closed(TachyonParams(m=0.0, gamma=0.7), OsrFormula.CLEAN) == 1.0
    assert osr_closed(TachyonParams(m=1e-9, gamma=0.7), OsrFormula.CLEAN) == pytest.approx(1.0)
    assert osr_closed(TachyonParams(m=0.5, gamma=1e-12), OsrFormula.STRONG_NH) == pytest.approx(1.5)
    assert osr_closed(TachyonParams(m=1 - 1e-9, gamma=0.0), OsrFormula.CLEAN) == pytest.approx(0.5, abs=1e-6)
    # weak-NH expansion has an O(mbar^4) remainder
    def err(m):
        p = TachyonParams(m=m, gamma=1.5)
        return abs(osr_closed(p, OsrFormula.EXACT) - osr_closed(p, OsrFormula.WEAK_NH))
    assert 10.0 <= err(0.2) / err(0.1) <= 24.0
    with pytest.raises(RegimeError):
        osr_closed(TachyonParams(m=1.2, gamma=1.0), OsrFormula.EXACT)


def test_osr_exact_branch_continuity():
    # crossing m = gamma flips the artanh arguments past 1; values stay real
    # and continuous
    vals = [osr_closed(TachyonParams(m=m, gamma=0.5), OsrFormula.EXACT)
            for m in (0.45, 0.49, 0.52, 0.6)]
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs < 0.05)


def test_param_validation():
    with pytest.raises(ValueError):
        TachyonParams(v_f=0.0)
    with pytest.raises(ValueError):
        TachyonParams(gamma=-0.1)
