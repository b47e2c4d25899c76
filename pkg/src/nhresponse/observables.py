"""Zero-temperature distribution functions and expectation values.

The occupied-state weights follow from closing the frequency integral of
``i (G_R - G_A)/(2 pi)`` over the lower half plane, which leaves principal
logarithms of the (retarded-shifted) eigenvalues.  The three frameworks
differ in the advanced projector: ``|L><R|`` for standard dissipative
systems, the common ``|R><L|`` for PHQM, and a pure right-right state for
postselection.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BranchAmbiguityError,
    ComplexSpectrumError,
    DegenerateSelectionError,
    DegenerateSpectrumError,
    NotHermitianError,
)
from .greens import Framework, FrameworkVariant
from .quadrature import QuadratureSpec, _compactify, adaptive_gk
from .spectral import (
    BiorthoSystem,
    PseudoMetric,
    TOL_REAL,
    as_square_matrix,
    eig_biortho,
    hermitize,
)

DEGENERACY_TOL = 1e-8
BRANCH_TOL = 1e-6

__all__ = [
    "occupation",
    "occupation_integral",
    "expectation",
    "nhts_density",
    "select_ground_state",
]


def _retarded_system(H, fw: Framework) -> tuple[BiorthoSystem, np.ndarray]:
    """Biorthogonal system of ``H`` plus eigenvalues shifted by ``-i gamma``
    so every retarded pole sits in the lower half plane."""
    system = eig_biortho(as_square_matrix(H))
    xi = system.eigenvalues - 1j * fw.gamma
    scale = max(1.0, float(np.abs(xi).max()))
    diffs = np.abs(xi[:, None] - xi[None, :])
    np.fill_diagonal(diffs, np.inf)
    if diffs.min() <= DEGENERACY_TOL * scale:
        raise DegenerateSpectrumError(
            f"minimum eigenvalue separation {diffs.min():.3e} too small for "
            "a well-conditioned projector decomposition"
        )
    args = np.angle(xi)
    if np.any(np.pi - np.abs(args) < BRANCH_TOL):
        raise BranchAmbiguityError(
            "a retarded pole sits on the negative real axis; supply gamma > 0 "
            "(or a small delta0) to fix the branch of the logarithm"
        )
    return system, xi


def occupation(H, fw: Framework) -> np.ndarray:
    """Equal-time occupation matrix ``N_ij = <c^dag_i c_j>`` at ``T = 0``.

    Standard framework: ``(i/2pi) sum_a [|R_a><L_a| log(xi_a) -
    |L_a><R_a| log(xi_a^*)]`` (Hermitian result).  PHQM: both causal
    projectors equal ``|R_a><L_a|``, leaving weights ``-arg(xi_a)/pi``.
    Postselected: pure state built from the selected right eigenvector.
    """
    system, xi = _retarded_system(H, fw)
    R, L = system.right, system.left
    if fw.variant is FrameworkVariant.STANDARD:
        log_xi = np.log(xi)
        m = (R * log_xi) @ L.conj().T - (L * np.conj(log_xi)) @ R.conj().T
        return (0.5j / np.pi) * m.T
    if fw.variant is FrameworkVariant.PHQM:
        weights = -np.angle(xi) / np.pi
        return ((R * weights) @ L.conj().T).T
    idx = select_ground_state(system)
    r0 = system.right[:, idx]
    rho = np.outer(r0, r0.conj()) / np.vdot(r0, r0).real
    return rho.T


def occupation_integral(H, fw: Framework, spec: QuadratureSpec | None = None) -> np.ndarray:
    """Occupation matrix by direct frequency quadrature of
    ``i int_{-inf}^0 (G_R - G_A) dw / 2pi`` (independent oracle for
    :func:`occupation`; standard and PHQM frameworks only).

    The advanced function is built by direct inversion, not from the
    projector decomposition, so the two routes share no code path.
    """
    H = as_square_matrix(H)
    if fw.variant is FrameworkVariant.POSTSELECTED:
        raise ValueError("no frequency-integral representation for postselection")
    fw.require_stable(H)
    spec = spec or QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13)
    dim = H.shape[0]
    eye = np.eye(dim)
    ev = np.linalg.eigvals(H)
    scale = max(1.0, float(np.abs(ev).max()) + fw.gamma)

    def integrand(w):
        m_r = (w[:, None, None] + 1j * fw.gamma) * eye[None] - H[None]
        g_r = np.linalg.inv(m_r)
        if fw.variant is FrameworkVariant.STANDARD:
            g_a = g_r.conj().swapaxes(1, 2)
        else:
            m_a = (w[:, None, None] - 1j * fw.gamma) * eye[None] - H[None]
            g_a = np.linalg.inv(m_a)
        return g_r - g_a

    u_lo, u_hi, x_of_u, jac, u_of_x = _compactify((-np.inf, 0.0), spec.tail_map, scale)
    breaks = [float(u_of_x(x)) for x in ev.real if x < 0]
    edges = np.unique(np.concatenate([[u_lo, u_hi], breaks,
                                      np.linspace(u_lo, u_hi, 9)[1:-1]]))

    def g(u):
        vals = integrand(np.asarray(x_of_u(u)))
        return vals * jac(u)[:, None, None]

    value, _err, _n, converged = adaptive_gk(g, edges, spec)
    if not converged:
        raise RuntimeError("occupation quadrature did not converge")
    return (0.5j / np.pi) * value.T


def expectation(O, H, fw: Framework) -> complex:
    """Zero-temperature equilibrium expectation value of a one-body operator.

    Standard: ``(i/2pi) sum_a [log(xi_a) <L_a|O|R_a> - log(xi_a^*)
    <R_a|O|L_a>]``.  PHQM: ``-(1/pi) sum_a arg(xi_a) <L_a|O|R_a>``.
    Postselected: ``<R_0|O|R_0> / <R_0|R_0>`` with the ground state picked
    by :func:`select_ground_state`.
    """
    O = as_square_matrix(O)
    if fw.variant is FrameworkVariant.POSTSELECTED:
        system = eig_biortho(as_square_matrix(H))
        idx = select_ground_state(system)
        r0 = system.right[:, idx]
        return complex(np.vdot(r0, O @ r0) / np.vdot(r0, r0))
    system, xi = _retarded_system(H, fw)
    R, L = system.right, system.left
    lor = np.einsum("ia,ij,ja->a", L.conj(), O, R)  # <L_a|O|R_a>
    if fw.variant is FrameworkVariant.PHQM:
        return complex(-(np.angle(xi) * lor).sum() / np.pi)
    rol = np.einsum("ia,ij,ja->a", R.conj(), O, L)  # <R_a|O|L_a>
    log_xi = np.log(xi)
    return complex((0.5j / np.pi) * (log_xi * lor - np.conj(log_xi) * rol).sum())


def nhts_density(H, eta: PseudoMetric, beta: float) -> np.ndarray:
    """Non-Hermitian thermal state ``rho = e^{-beta H} eta^{-1}``, trace 1.

    Requires a real spectrum.  The result is Hermitian and stationary under
    the generalized von Neumann equation ``d rho/dt = -i (H rho - rho
    H^dag)``; both properties are asserted before returning.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    system = eig_biortho(as_square_matrix(H))
    if not system.is_real_spectrum():
        raise ComplexSpectrumError("NHTS requires a real spectrum")
    xi = system.eigenvalues.real
    weights = np.exp(-beta * (xi - xi.min()))  # shift guards overflow
    exp_h = (system.right * weights) @ system.left.conj().T
    rho = exp_h @ eta.eta_inv
    rho = rho / np.trace(rho)
    herm_resid = np.linalg.norm(rho - rho.conj().T)
    if herm_resid > 1e-10 * max(1.0, np.linalg.norm(rho)):
        raise NotHermitianError(f"NHTS Hermiticity residual {herm_resid:.3e}")
    H = as_square_matrix(H)
    stat_resid = np.linalg.norm(H @ rho - rho @ H.conj().T)
    bound = 1e-9 * max(np.linalg.norm(H) * np.linalg.norm(rho), 1e-300)
    if stat_resid > bound:
        raise NotHermitianError(f"NHTS stationarity residual {stat_resid:.3e}")
    return hermitize(rho)


def select_ground_state(system: BiorthoSystem, tol_real: float = TOL_REAL) -> int:
    """Index of the stationary-state eigenvalue: maximum imaginary part,
    ties (within ``tol_real``) broken by minimum real part.

    For a real spectrum this reduces to the minimum-energy state.
    """
    xi = system.eigenvalues
    scale = max(1.0, float(np.abs(xi).max()))
    tol = tol_real * scale
    im_max = xi.imag.max()
    candidates = np.flatnonzero(xi.imag >= im_max - tol)
    best = candidates[np.argmin(xi.real[candidates])]
    clash = [i for i in candidates
             if i != best and abs(xi.real[i] - xi.real[best]) <= tol]
    if clash:
        raise DegenerateSelectionError(
            f"states {best} and {clash[0]} tie in both Im and Re of the eigenvalue"
        )
    return int(best)
