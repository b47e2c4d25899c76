import numpy as np
import pytest

from nhresponse.errors import (
    BranchAmbiguityError,
    ComplexSpectrumError,
    DegenerateSelectionError,
    DegenerateSpectrumError,
)
from nhresponse.greens import Framework
from nhresponse.observables import (
    expectation,
    nhts_density,
    occupation,
    occupation_integral,
    select_ground_state,
)
from nhresponse.spectral import BiorthoSystem, eig_biortho, pseudo_metric
from nhresponse.tachyon import SIGMA_Z, TachyonParams, hamiltonian

RNG = np.random.default_rng(17)


def random_stable(dim, framework):
    h0 = RNG.normal(size=(dim, dim)) + 1j * RNG.normal(size=(dim, dim))
    h0 = 0.5 * (h0 + h0.conj().T)
    if framework == "standard":
        a = RNG.normal(size=(dim, dim)) + 1j * RNG.normal(size=(dim, dim))
        decay = 0.3 * (a @ a.conj().T) / dim + 0.05 * np.eye(dim)
        return h0 - 1j * decay
    s = np.eye(dim) + 0.3 * RNG.normal(size=(dim, dim))
    return s @ np.diag(RNG.normal(size=dim)) @ np.linalg.inv(s)


def test_two_level_filling():
    n = occupation(SIGMA_Z, Framework.standard(1e-5))
    np.testing.assert_allclose(np.diag(n).real, [0.0, 1.0], atol=1e-4)
    np.testing.assert_allclose(n, n.conj().T, atol=1e-12)


def test_phqm_clean_weights_and_expectation():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    fw = Framework.phqm(1e-5)
    system = eig_biortho(H)
    n = occupation(H, fw)
    assert np.trace(n).real == pytest.approx(1.0, abs=1e-4)
    want = system.left[:, 0].conj() @ SIGMA_Z @ system.right[:, 0]
    got = expectation(SIGMA_Z, H, fw)
    assert got == pytest.approx(complex(want), abs=1e-4)


def test_phqm_weights_within_unit_interval():
    fw = Framework.phqm(1e-4)
    for _ in range(20):
        H = random_stable(3, "phqm")
        xi = eig_biortho(H).eigenvalues - 1j * fw.gamma
        weights = -np.angle(xi) / np.pi
        assert np.all(weights >= 0.0) and np.all(weights <= 1.0)


def test_standard_occupation_hermitian_bounded():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    n = occupation(H, Framework.standard(1.5))
    np.testing.assert_allclose(n, n.conj().T, atol=1e-10)
    d = np.diag(n).real
    assert np.all(d >= -1e-8) and np.all(d <= 1 + 1e-8)
    assert 0.0 <= np.trace(n).real <= 2.0


@pytest.mark.parametrize("framework,gamma", [("standard", 0.8), ("phqm", 0.3)])
def test_occupation_oracle_random(framework, gamma):
    fw = Framework.standard(gamma) if framework == "standard" else Framework.phqm(gamma)
    for i in range(8):
        dim = 2 if i % 2 == 0 else 3
        H = random_stable(dim, framework)
        n_closed = occupation(H, fw)
        n_quad = occupation_integral(H, fw)
        np.testing.assert_allclose(n_closed, n_quad, atol=1e-6)


def test_frameworks_disagree_for_nonhermitian():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    a = expectation(SIGMA_Z, H, Framework.standard(1.5))
    b = expectation(SIGMA_Z, H, Framework.phqm(1.5))
    assert abs(a - b) > 1e-6


def test_particle_number_phqm():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    n = expectation(np.eye(2), H, Framework.phqm(1e-5))
    assert n.real == pytest.approx(1.0, abs=1e-4)


def test_postselected_expectation_tachyonic():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=1.2))
    system = eig_biortho(H)
    idx = select_ground_state(system)
    assert system.eigenvalues[idx].imag == pytest.approx(np.sqrt(1.2**2 - 1.0))
    got = expectation(SIGMA_Z, H, Framework.postselected())
    r0 = system.right[:, idx]
    want = np.vdot(r0, SIGMA_Z @ r0) / np.vdot(r0, r0)
    assert got == pytest.approx(complex(want))


def test_branch_ambiguity_without_broadening():
    with pytest.raises(BranchAmbiguityError):
        occupation(SIGMA_Z, Framework.standard(0.0))


def test_degenerate_spectrum_rejected():
    with pytest.raises(DegenerateSpectrumError):
        occupation(np.eye(2), Framework.standard(0.5))


def test_select_ground_state_rules():
    def system_with(eigs):
        eigs = np.asarray(eigs, dtype=complex)
        eye = np.eye(len(eigs), dtype=complex)
        return BiorthoSystem(eigs, eye, eye.copy(), 1.0)

    assert select_ground_state(system_with([-1.0, 1.0])) == 0
    assert select_ground_state(system_with([0.2 + 0.5j, 0.1 - 0.5j])) == 0
    assert select_ground_state(system_with([1.0 + 0.0j, -1.0 + 0.0j])) == 1
    with pytest.raises(DegenerateSelectionError):
        select_ground_state(system_with([0.5 + 0.2j, 0.5 + 0.2j]))


def test_nhts_gibbs_limit():
    import scipy.linalg as sla

    H = np.array([[0.3, 0.1], [0.1, -0.2]], dtype=complex)
    eta = pseudo_metric(eig_biortho(H))
    rho = nhts_density(H, eta, beta=1.5)
    gibbs = sla.expm(-1.5 * H)
    gibbs /= np.trace(gibbs)
    np.testing.assert_allclose(rho, gibbs, atol=1e-12)


def test_nhts_properties_tachyon():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    eta = pseudo_metric(eig_biortho(H))
    rho = nhts_density(H, eta, beta=2.0)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > 0
    assert np.linalg.norm(H @ rho - rho @ H.conj().T) <= 1e-9


def test_nhts_ground_state_projector_limit():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    system = eig_biortho(H)
    eta = pseudo_metric(system)
    gap = 1.6
    rho = nhts_density(H, eta, beta=50.0 / gap)
    idx = select_ground_state(system)
    r0 = system.right[:, idx]
    proj = np.outer(r0, r0.conj()) / np.vdot(r0, r0).real
    np.testing.assert_allclose(rho, proj, atol=1e-6)


def test_nhts_requires_real_spectrum():
    H = hamiltonian(0.0, TachyonParams(delta=1.0, m=0.6))
    eta = pseudo_metric(eig_biortho(H))
    H_bad = hamiltonian(0.0, TachyonParams(delta=1.0, m=1.2))
    with pytest.raises(ComplexSpectrumError):
        nhts_density(H_bad, eta, beta=1.0)
