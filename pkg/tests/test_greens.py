import numpy as np
import pytest

from nhresponse.errors import DomainError, MissingMetricError, SingularMatrixError, StabilityError
from nhresponse.greens import (
    Framework,
    action_kernel,
    fermi,
    g_advanced,
    g_matsubara,
    g_retarded,
    matsubara_kernel_sum,
    spectral_function,
)
from nhresponse.quadrature import integrate_semi_infinite
from nhresponse.spectral import eig_biortho, pseudo_metric
from nhresponse.tachyon import SIGMA_Z, TachyonParams, hamiltonian


def tachyon(k, m, gamma=0.0):
    return hamiltonian(k, TachyonParams(delta=1.0, m=m, gamma=gamma))


def test_retarded_scalar_limit():
    fw = Framework.standard(1.0)
    g = g_retarded(np.zeros((1, 1)), fw, 0.0)
    np.testing.assert_allclose(g, [[-1j]], atol=1e-15)


def test_retarded_tachyon_matrix():
    fw = Framework.standard(1.5)
    H = tachyon(0.0, 0.6)
    got = g_retarded(H, fw, 0.0)
    want = np.linalg.inv(np.array([[2.1j, 1j], [-1j, 0.9j]]))
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_retarded_poles_lower_half_plane():
    fw = Framework.standard(1.5)
    for k in np.linspace(-4, 4, 21):
        H = tachyon(k, 0.9)
        poles = np.linalg.eigvals(H - 1.5j * np.eye(2))
        assert np.all(poles.imag < 0)
        fw.require_stable(H)  # must not raise for gamma > |m|


def test_stability_violation():
    fw = Framework.standard(0.5)
    with pytest.raises(StabilityError):
        fw.require_stable(tachyon(0.0, 0.6))


def test_singular_matrix_at_real_pole():
    fw = Framework.standard(0.0)
    H = SIGMA_Z.copy()
    with pytest.raises(SingularMatrixError):
        g_retarded(H, fw, 1.0)


def test_advanced_frameworks_agree_in_hermitian_limit():
    H = tachyon(0.4, 0.0)
    eta = pseudo_metric(eig_biortho(H))
    ga_std = g_advanced(H, Framework.standard(1.5), 0.7)
    ga_phqm = g_advanced(H, Framework.phqm(1.5), 0.7, eta)
    np.testing.assert_allclose(ga_std, ga_phqm, atol=1e-12)


def test_advanced_phqm_matrix_and_identity():
    H = tachyon(0.0, 0.6)
    eta = pseudo_metric(eig_biortho(H))
    fw = Framework.phqm(1.5)
    got = g_advanced(H, fw, 0.0, eta)
    want = np.linalg.inv(np.array([[-0.9j, 1j], [-1j, -2.1j]]))
    np.testing.assert_allclose(got, want, atol=1e-12)
    # standard conjugation differs once H is non-Hermitian
    gr = g_retarded(H, fw, 0.0)
    assert np.linalg.norm(got - gr.conj().T) > 1e-6
    np.testing.assert_allclose(
        g_advanced(H, Framework.standard(1.5), 0.0),
        g_retarded(H, Framework.standard(1.5), 0.0).conj().T, atol=1e-15)


def test_advanced_phqm_requires_metric():
    with pytest.raises(MissingMetricError):
        g_advanced(tachyon(0.0, 0.6), Framework.phqm(1.5), 0.0)


def test_matsubara_conjugation_identity():
    h0 = np.array([[0.2, 0.4], [0.4, -0.1]], dtype=complex)
    Gamma = np.array([[-0.5, 0.1], [0.1, -0.7]], dtype=complex)
    fw = Framework.standard(0.3)
    for n in range(-5, 5):
        left = g_matsubara(h0, Gamma, fw, n, 0.7).conj().T
        right = g_matsubara(h0, Gamma, fw, -n - 1, 0.7)
        np.testing.assert_allclose(left, right, atol=1e-14)


def test_matsubara_phqm_no_sign_on_hamiltonian():
    h0 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    Gamma = np.array([[0.4, 0.0], [0.0, -0.4]], dtype=complex)
    H = h0 + 1j * Gamma
    T = 0.5
    fw = Framework.phqm(0.0)
    for n in (-3, -1, 0, 2):
        wn = (2 * n + 1) * np.pi * T
        want = np.linalg.inv(1j * wn * np.eye(2) - H)
        np.testing.assert_allclose(g_matsubara(h0, Gamma, fw, n, T), want,
                                   atol=1e-14)


def test_matsubara_scalar_dissipative():
    gam0 = -0.7  # anti-Hermitian coefficient of H = h0 + i*Gamma
    fw = Framework.standard(0.0)
    T = 1.0
    for n in (-2, 0, 3):
        wn = (2 * n + 1) * np.pi * T
        got = g_matsubara(np.zeros((1, 1)), gam0 * np.ones((1, 1)), fw, n, T)
        want = 1.0 / (1j * wn - 1j * np.sign(wn) * gam0)
        np.testing.assert_allclose(got, [[want]], atol=1e-15)


def test_matsubara_matches_continued_retarded():
    # frequency-independent decay: the Matsubara function equals the
    # analytically continued retarded/advanced resolvent exactly
    p = TachyonParams(delta=1.0, m=0.6, gamma=1.5)
    H = hamiltonian(0.3, p)
    h0 = 0.5 * (H + H.conj().T)
    Gamma = (H - H.conj().T) / 2j
    fw = Framework.standard(1.5)
    T = 0.3
    for n in (170, -171):  # |w_n| > 100 ||H||
        wn = (2 * n + 1) * np.pi * T
        got = g_matsubara(h0, Gamma, fw, n, T)
        if wn > 0:
            want = np.linalg.inv((1j * wn + 1j * fw.gamma) * np.eye(2) - H)
        else:
            want = np.linalg.inv((1j * wn - 1j * fw.gamma) * np.eye(2) - H.conj().T)
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_spectral_function_peaks_and_sum_rule():
    # ridge maxima track +-sqrt(k^2+1) once the bands are resolved from the
    # broadening (E(k) > gamma); at small k the two Lorentzians merge
    fw = Framework.standard(1.5)
    for k in (2.0, 3.0, 4.0):
        H = tachyon(k, 0.0)
        e = np.sqrt(k * k + 1.0)
        omegas = np.linspace(0.5 * e, 1.5 * e, 801)
        vals = [spectral_function(H, fw, w) for w in omegas]
        peak = omegas[int(np.argmax(vals))]
        assert abs(peak - e) <= 0.15
        r = integrate_semi_infinite(lambda w: spectral_function(H, fw, w),
                                    (-np.inf, np.inf), scale=5.0 + k)
        np.testing.assert_allclose(r.value.real / (2 * np.pi), 2.0, atol=1e-4)


def test_spectral_function_clean_limit_concentrates():
    gamma = 1e-3
    fw = Framework.standard(gamma)
    H = tachyon(0.0, 0.0)
    # Lorentzian peak height 2/gamma per band at the eigenvalue
    assert spectral_function(H, fw, 1.0) * gamma / 2.0 == pytest.approx(1.0, rel=1e-4)


def test_action_kernel_values_and_symmetry():
    assert action_kernel(0.5, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert action_kernel(0.25, 1.0) == pytest.approx(np.sqrt(2.0), abs=1e-12)
    for T in (0.5, 2.0):
        for tau in (0.1 / T, 0.37 / T):
            assert action_kernel(tau, T) == pytest.approx(
                action_kernel(1.0 / T - tau, T), rel=1e-12)
    with pytest.raises(DomainError):
        action_kernel(0.0, 1.0)
    with pytest.raises(DomainError):
        action_kernel(1.1, 1.0)


def test_action_kernel_matches_matsubara_sum():
    for T in (0.5, 1.0, 2.0):
        for frac in (0.1, 0.25, 0.5):
            tau = frac / T
            assert abs(action_kernel(tau, T)
                       - matsubara_kernel_sum(tau, T)) <= 1e-4


def test_fermi_limits():
    assert fermi(-1.0, 0.0) == 1.0
    assert fermi(1.0, 0.0) == 0.0
    assert fermi(0.0, 0.5) == pytest.approx(0.5)
    assert fermi(np.array([-800.0, 800.0]), 1.0) == pytest.approx([1.0, 0.0])
