"""Linear-response integrals: current-current correlator, optical and DC
conductivity, optical sum rule, clean-limit Kubo sum, Kramers-Kronig.

Conventions (``e = v_F = 1`` internally):

* ``chi_local`` returns the raw correlator
  ``chi(Omega) = -int dk/2pi int dw/2pi i  n_F(w) tr[(G_R - G_A) A G_R(w+Omega) B
  + G_A(w-Omega) A (G_R - G_A) B]``.
* ``optical_sum`` returns ``-pi Re chi(0)`` in units ``e^2 v_F`` (the
  conventional value is 1).
* ``sigma_optical`` and ``sigma_dc`` are reported in units
  ``e^2 v_F / (2 pi)``, i.e. ``2 pi`` times the raw Kubo value, matching
  the closed-form table of :mod:`nhresponse.tachyon`.

The momentum integral is outermost and the frequency integral innermost,
each with its own :class:`QuadratureSpec`; integrands are evaluated on
node batches.  Known features (resolvent ridges, the Fermi edge, interband
resonances) seed the initial subdivision so narrow structures survive the
clean limit ``gamma -> delta0``.
"""

from __future__ import annotations

import numpy as np

from .errors import InsufficientGridError
from .greens import Framework, FrameworkVariant, fermi
from .quadrature import (
    QuadratureSpec,
    ResponseResult,
    TailMap,
    _compactify,
    adaptive_gk,
    integrate_semi_infinite,
)
from .spectral import PseudoMetric, as_square_matrix, eig_biortho, pseudo_metric

__all__ = [
    "QuadratureSpec",
    "ResponseResult",
    "TailMap",
    "integrate_semi_infinite",
    "chi_local",
    "sigma_optical",
    "sigma_dc",
    "optical_sum",
    "lehmann_term",
    "chi_phqm_clean",
    "kramers_kronig",
]

_DEFAULT_OMEGA_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13)
_DEFAULT_K_SPEC = QuadratureSpec(rel_tol=3e-8, abs_tol=1e-12)


class _KPoint:
    """Batched causal Green's functions of one Bloch Hamiltonian."""

    def __init__(self, H, fw: Framework, eta: PseudoMetric | None = None):
        self.H = as_square_matrix(H)
        self.fw = fw
        self.dim = self.H.shape[0]
        self.eye = np.eye(self.dim)
        if fw.variant is FrameworkVariant.PHQM and eta is None:
            eta = pseudo_metric(eig_biortho(self.H))
        self.eta = eta
        self.poles = np.linalg.eigvals(self.H) - 1j * fw.gamma

    def g_r(self, w):
        m = (w[:, None, None] + 1j * self.fw.gamma) * self.eye[None] - self.H[None]
        return np.linalg.inv(m)

    def g_a(self, w, g_r=None):
        if self.fw.variant is FrameworkVariant.STANDARD:
            gr = self.g_r(w) if g_r is None else g_r
            return gr.conj().swapaxes(1, 2)
        gr = self.g_r(w) if g_r is None else g_r
        return self.eta.eta_inv[None] @ gr.conj().swapaxes(1, 2) @ self.eta.eta[None]


def _trace(x):
    return x.diagonal(axis1=1, axis2=2).sum(axis=1)


def _chi_omega_integral(kp: _KPoint, A, B, Omega: float, T: float,
                        spec: QuadratureSpec):
    """Inner frequency integral of the correlator at one momentum.

    Returns the raw ``(value, err, converged)`` of
    ``-1/(2 pi i) int dw n_F tr[...]``.
    """
    A = A[None]
    B = B[None]

    def term(w):
        gr = kp.g_r(w)
        ga = kp.g_a(w, g_r=gr)
        d = gr - ga
        if Omega == 0.0:
            grp, gam = gr, ga
        else:
            grp = kp.g_r(w + Omega)
            gam = kp.g_a(w - Omega)
        return _trace(d @ A @ grp @ B) + _trace(gam @ A @ d @ B)

    re_poles = kp.poles.real
    widths = max(kp.fw.gamma, 1e-12)
    scale = max(1.0, float(np.abs(kp.poles).max()) + Omega + 10 * T + widths)
    features = np.concatenate([re_poles, re_poles - Omega, re_poles + Omega, [0.0, -Omega]])

    if T == 0.0:
        u_lo, u_hi, x_of_u, jac, u_of_x = _compactify(
            (-np.inf, 0.0), spec.tail_map, scale)

        def g(u):
            return term(np.asarray(x_of_u(u))) * jac(u)
        feats = [float(u_of_x(x)) for x in features if x < 0]
    else:
        u_lo, u_hi, x_of_u, jac, u_of_x = _compactify(
            (-np.inf, np.inf), spec.tail_map, scale)

        def g(u):
            w = np.asarray(x_of_u(u))
            return term(w) * fermi(w, T) * jac(u)
        feats = [float(u_of_x(x)) for x in features]
        feats += [float(u_of_x(x)) for x in (-8 * T, 8 * T)]
    # widen each feature by multiples of the resolvent width so the seed
    # panels bracket narrow ridges even in the clean limit
    widened = []
    for x in features:
        for shift in (0.0, -widths, widths, -5 * widths, 5 * widths,
                      -25 * widths, 25 * widths):
            xx = x + shift
            if (T > 0.0 or xx < 0.0) and np.isfinite(xx):
                widened.append(float(u_of_x(xx)))
    edges = np.unique(np.clip(
        np.concatenate([[u_lo, u_hi], feats, widened,
                        np.linspace(u_lo, u_hi, 9)[1:-1]]),
        u_lo, u_hi))
    value, err, _n, conv = adaptive_gk(g, edges, spec)
    pref = -1.0 / (2j * np.pi)
    return pref * value, abs(pref) * err, conv


def _band_gap(H_of_k, k: float) -> float:
    ev = np.sort(np.linalg.eigvals(H_of_k(float(k))).real)
    return float(ev[-1] - ev[0])


def _interband_ks(H_of_k, Omega: float, k_scale: float, broadening: float,
                  nscan: int = 257):
    """Momenta where an interband gap matches ``Omega``, each widened by
    telescoping multiples of the resonance width (seeds for the k grid)."""
    if Omega <= 0.0:
        return []
    u = np.linspace(-np.pi / 2, np.pi / 2, nscan + 2)[1:-1]
    ks = k_scale * np.tan(u)
    f = np.array([_band_gap(H_of_k, k) for k in ks]) - Omega
    seeds = []
    for i in range(len(ks) - 1):
        if f[i] == 0.0 or (f[i] < 0) != (f[i + 1] < 0):
            lo_k, hi_k = ks[i], ks[i + 1]
            f_lo = f[i]
            for _ in range(40):
                mid = 0.5 * (lo_k + hi_k)
                fm = _band_gap(H_of_k, mid) - Omega
                if (fm < 0) == (f_lo < 0):
                    lo_k, f_lo = mid, fm
                else:
                    hi_k = mid
            root = 0.5 * (lo_k + hi_k)
            h = 1e-4 * max(1.0, abs(root))
            slope = abs(_band_gap(H_of_k, root + h) - _band_gap(H_of_k, root - h)) / (2 * h)
            width = max(broadening, 1e-9) / max(slope, 1e-9)
            seeds.append(root)
            for mult in (1.0, 5.0, 25.0, 125.0):
                seeds.extend((root - mult * width, root + mult * width))
    return seeds


def _k_scale(H_of_k) -> float:
    return max(1.0, float(np.linalg.norm(H_of_k(0.0))))


def _outer_k_integral(f_of_k, spec: QuadratureSpec, k_scale: float, breakpoints,
                      k_window: float | None = None):
    """``int dk/2pi f(k)`` over the real line with per-node python loop.

    Inner (frequency) errors are folded into the estimate rather than
    and-ed as flags: a tail integral that bottomed out at its roundoff
    floor is benign as long as its error contribution stays below the
    outer tolerance.

    With ``k_window`` the momenta are restricted to ``[-K, K]``: beyond it
    the resolvent ridges sit so far from the origin that their frequency
    integrals are evaluated in pure cancellation noise (eps * |k| / gamma)
    while the true integrand has long decayed.  The dropped tail is bounded
    by ``|f(±K)| * K`` (valid for >= 1/k^2 decay) and added to the error.
    """
    inner_err = [0.0]

    def f_batch(ks):
        out = np.empty(ks.size, dtype=complex)
        worst = 0.0
        for i, k in enumerate(ks):
            v, e, _conv = f_of_k(float(k))
            out[i] = v
            worst = max(worst, e)
        inner_err[0] = max(inner_err[0], worst)
        return out

    u_lo, u_hi, x_of_u, jac, u_of_x = _compactify(
        (-np.inf, np.inf), spec.tail_map, k_scale)

    tail_bound = 0.0
    if k_window is not None:
        u_lo = float(u_of_x(-k_window))
        u_hi = float(u_of_x(k_window))
        edge_f = max(abs(f_of_k(-k_window)[0]), abs(f_of_k(k_window)[0]))
        tail_bound = 2.0 * edge_f * k_window / (2 * np.pi)

    def g(u):
        return f_batch(np.asarray(x_of_u(u))) * jac(u)

    feats = [float(u_of_x(x)) for x in breakpoints
             if np.isfinite(x) and (k_window is None or abs(x) < k_window)]
    edges = np.unique(np.concatenate(
        [[u_lo, u_hi], feats, np.linspace(u_lo, u_hi, 17)[1:-1]]))
    value, err, neval, conv = adaptive_gk(g, edges, spec)
    value = value / (2 * np.pi)
    # worst inner error scaled by an effective ridge measure, conservative
    inner_contrib = inner_err[0] * k_scale
    err = err / (2 * np.pi) + inner_contrib + tail_bound
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    conv = conv and inner_contrib <= 30 * tol and tail_bound <= 30 * tol
    return value, err, neval, conv


def chi_local(H_of_k, A_of_k, B_of_k, fw: Framework, Omega: float,
              T: float = 0.0,
              spec_omega: QuadratureSpec | None = None,
              spec_k: QuadratureSpec | None = None) -> ResponseResult:
    """Local (q -> 0) response function ``chi_AB(Omega)`` by nested quadrature.

    ``H_of_k``, ``A_of_k``, ``B_of_k`` map a momentum to matrices; the
    vertices must be frequency independent.  The framework selects the
    advanced Green's function (standard conjugation or the metric sandwich
    ``eta^{-1} G_R^dag eta``).  At ``T = 0`` the Fermi factor becomes a hard
    cutoff and the domain is split at ``w = 0`` and ``w = -Omega``.

    The chemical potential lives inside ``H_of_k``; for PHQM a gamma of
    exactly zero must be regularized by the caller (pass ``delta0`` as the
    framework's gamma).
    """
    if Omega < 0:
        raise ValueError("chi_local expects Omega >= 0 (use sigma_optical for Omega < 0)")
    if fw.variant is FrameworkVariant.POSTSELECTED:
        raise ValueError("the postselected framework carries no response integrals")
    spec_omega = spec_omega or _DEFAULT_OMEGA_SPEC
    spec_k = spec_k or _DEFAULT_K_SPEC

    def f_of_k(k):
        H = H_of_k(k)
        fw.require_stable(H)
        kp = _KPoint(H, fw)
        A = as_square_matrix(A_of_k(k))
        B = as_square_matrix(B_of_k(k))
        return _chi_omega_integral(kp, A, B, Omega, T, spec_omega)

    kscale = _k_scale(H_of_k)
    breaks = [0.0] + _interband_ks(H_of_k, Omega, kscale, max(fw.gamma, 1e-9))
    value, err, neval, conv = _outer_k_integral(f_of_k, spec_k, kscale, breaks)
    return ResponseResult(complex(value), float(err), neval, conv)


def sigma_optical(H_of_k, A_of_k, B_of_k, fw: Framework, Omega: float,
                  T: float = 0.0,
                  spec_omega: QuadratureSpec | None = None,
                  spec_k: QuadratureSpec | None = None,
                  chi0: ResponseResult | None = None) -> ResponseResult:
    """Optical conductivity ``sigma(Omega) = i [chi(Omega) - chi(0)] / Omega``
    in units ``e^2 v_F / (2 pi)``.

    ``Omega`` must be nonzero (the Drude delta term vanishes here; use
    :func:`sigma_dc` for the DC limit).  Negative frequencies are returned
    as ``conj(sigma(|Omega|))``, which builds in the evenness of the real
    part.  Pass a precomputed ``chi0`` to amortize sweeps.
    """
    if Omega == 0.0:
        raise ValueError("sigma_optical requires Omega != 0; use sigma_dc at Omega = 0")
    if Omega < 0.0:
        res = sigma_optical(H_of_k, A_of_k, B_of_k, fw, -Omega, T,
                            spec_omega, spec_k, chi0)
        return ResponseResult(np.conj(res.value), res.est_error,
                              res.evaluations, res.converged)
    if chi0 is None:
        chi0 = chi_local(H_of_k, A_of_k, B_of_k, fw, 0.0, T, spec_omega, spec_k)
    chiw = chi_local(H_of_k, A_of_k, B_of_k, fw, Omega, T, spec_omega, spec_k)
    value = 2 * np.pi * 1j * (chiw.value - chi0.value) / Omega
    err = 2 * np.pi * (chiw.est_error + chi0.est_error) / abs(Omega)
    return ResponseResult(value, err, chiw.evaluations + chi0.evaluations,
                          chiw.converged and chi0.converged)


def _vertex_is_dh_dk(H_of_k, J_of_k) -> bool:
    """True if J is k-independent and equals ``e dH/dk`` (then the occupied-
    sea term of the DC formula integrates to zero over k)."""
    ks = (0.37, -1.41, 2.23)
    j0 = as_square_matrix(J_of_k(ks[0]))
    scale = max(1.0, np.linalg.norm(j0))
    for k in ks:
        j = as_square_matrix(J_of_k(k))
        if np.linalg.norm(j - j0) > 1e-10 * scale:
            return False
        h = 1e-6 * max(1.0, abs(k))
        dh = (as_square_matrix(H_of_k(k + h)) - as_square_matrix(H_of_k(k - h))) / (2 * h)
        if np.linalg.norm(dh - j) > 1e-6 * scale:
            return False
    return True


def sigma_dc(H_of_k, J_of_k, fw: Framework, T: float = 0.0,
             spec_omega: QuadratureSpec | None = None,
             spec_k: QuadratureSpec | None = None) -> ResponseResult:
    """Longitudinal DC conductivity in units ``e^2 v_F / (2 pi)``.

    At ``T = 0`` this is ``int dk/2pi { tr[G_A(0) J G_R(0) J] +
    int_{-inf}^0 dw tr[G_R J G_R^2 J + G_A^2 J G_A J] }`` (the frequency
    derivative of the resolvent is ``-G^2``).  For a k-independent current
    matching ``e dH/dk`` the occupied-sea term drops after integrating by
    parts in k, and is skipped.  At ``T > 0`` the Fermi window integral
    replaces the two-term form.
    """
    if fw.variant is FrameworkVariant.POSTSELECTED:
        raise ValueError("the postselected framework carries no response integrals")
    spec_omega = spec_omega or _DEFAULT_OMEGA_SPEC
    spec_k = spec_k or _DEFAULT_K_SPEC
    skip_sea = T == 0.0 and _vertex_is_dh_dk(H_of_k, J_of_k)

    def f_of_k(k):
        H = H_of_k(k)
        fw.require_stable(H)
        kp = _KPoint(H, fw)
        J = as_square_matrix(J_of_k(k))[None]
        zero = np.zeros(1)
        gr0 = kp.g_r(zero)
        ga0 = kp.g_a(zero, g_r=gr0)
        first = complex(_trace(ga0 @ J @ gr0 @ J)[0])
        if T == 0.0 and skip_sea:
            return first, 0.0, True

        re_poles = kp.poles.real
        widths = max(kp.fw.gamma, 1e-12)
        scale = max(1.0, float(np.abs(kp.poles).max()) + 10 * T + widths)

        def sea(w):
            gr = kp.g_r(w)
            ga = kp.g_a(w, g_r=gr)
            return _trace(gr @ J @ (gr @ gr) @ J + (ga @ ga) @ J @ ga @ J)

        def widened(points, half_domain):
            out = []
            for x in points:
                for mult in (0.0, -1.0, 1.0, -5.0, 5.0, -25.0, 25.0, -125.0, 125.0):
                    xx = x + mult * widths
                    if not half_domain or xx < 0.0:
                        out.append(float(u_of_x(xx)))
            return out

        if T == 0.0:
            u_lo, u_hi, x_of_u, jac, u_of_x = _compactify(
                (-np.inf, 0.0), spec_omega.tail_map, scale)

            def g(u):
                return sea(np.asarray(x_of_u(u))) * jac(u)
            feats = widened(re_poles, half_domain=True)
        else:
            u_lo, u_hi, x_of_u, jac, u_of_x = _compactify(
                (-np.inf, np.inf), spec_omega.tail_map, scale)

            def g(u):
                w = np.asarray(x_of_u(u))
                nf = fermi(w, T)
                dnf = nf * (1.0 - nf) / T  # = -d n_F/dw
                gr = kp.g_r(w)
                ga = kp.g_a(w, g_r=gr)
                first_t = _trace(ga @ J @ gr @ J) * dnf
                sea_t = _trace(gr @ J @ (gr @ gr) @ J + (ga @ ga) @ J @ ga @ J) * nf
                return (first_t + sea_t) * jac(u)
            feats = widened(re_poles, half_domain=False)
            feats += [float(u_of_x(x)) for x in
                      (-8 * T, -T, 0.0, T, 8 * T)]
        edges = np.unique(np.clip(np.concatenate(
            [[u_lo, u_hi], feats, np.linspace(u_lo, u_hi, 9)[1:-1]]), u_lo, u_hi))
        val, err, _n, conv = adaptive_gk(g, edges, spec_omega)
        if T == 0.0:
            return first + complex(val), err, conv
        return complex(val), err, conv

    kscale = _k_scale(H_of_k)
    # the occupied-sea frequency integral at |k| >> all scales is pure
    # cancellation noise; restrict to a window with a measured tail bound
    window = None if skip_sea else 2e3 * kscale
    value, err, neval, conv = _outer_k_integral(f_of_k, spec_k, kscale, [0.0],
                                                k_window=window)
    # display units e^2 v_F/(2 pi): the 1/(2 pi) frequency measure cancels
    return ResponseResult(complex(value), float(err), neval, conv)


def optical_sum(H_of_k, J_of_k, fw: Framework,
                spec_omega: QuadratureSpec | None = None,
                spec_k: QuadratureSpec | None = None) -> ResponseResult:
    """Right-hand side of the conductivity sum rule, ``-pi Re chi(0)`` at
    ``T = 0``, ``mu = 0`` (units ``e^2 v_F``; the conventional value is 1)."""
    chi0 = chi_local(H_of_k, J_of_k, J_of_k, fw, 0.0, 0.0, spec_omega, spec_k)
    return ResponseResult(complex(-np.pi * chi0.value.real),
                          np.pi * chi0.est_error, chi0.evaluations,
                          chi0.converged)


def lehmann_term(system, A, B, Omega: float, T: float = 0.0, mu: float = 0.0,
                 delta0: float = 1e-6) -> complex:
    """Single-momentum Lehmann sum of the clean PHQM Kubo formula:

    ``sum_{a != b} <L_a|A|R_b><L_b|B|R_a> (n_F(xi_a) - n_F(xi_b)) /
    (Omega + xi_a - xi_b + i delta0)``.
    """
    xi = system.eigenvalues.real
    lar = system.left.conj().T @ as_square_matrix(A) @ system.right
    lbr = system.left.conj().T @ as_square_matrix(B) @ system.right
    nf = fermi(xi - mu, T)
    dn = nf[:, None] - nf[None, :]
    den = Omega + xi[:, None] - xi[None, :] + 1j * delta0
    mat = lar * lbr.T * dn / den
    np.fill_diagonal(mat, 0.0)
    return complex(mat.sum())


def chi_phqm_clean(biortho_of_k, A_of_k, B_of_k, Omega: float,
                   T: float = 0.0, mu: float = 0.0, delta0: float = 1e-6,
                   spec_k: QuadratureSpec | None = None) -> ResponseResult:
    """Clean-limit PHQM Kubo formula (Lehmann form, ``q -> 0``):

    ``chi(Omega) = int dk/2pi`` of :func:`lehmann_term`.

    Cross-validates :func:`chi_local` as ``gamma -> 0``.  Requires a real
    spectrum at every sampled momentum (``ExceptionalPointError`` and
    ``ComplexSpectrumError`` propagate from the eigensolver).
    """
    if delta0 <= 0:
        raise ValueError("delta0 must be positive")
    spec_k = spec_k or _DEFAULT_K_SPEC

    def chi_k(k):
        return lehmann_term(biortho_of_k(k), A_of_k(k), B_of_k(k),
                            Omega, T, mu, delta0), 0.0, True

    def h_of_k(k):
        s = biortho_of_k(k)
        return s.reconstruct()

    kscale = max(1.0, float(np.abs(biortho_of_k(0.0).eigenvalues).max()) + 1.0)
    breaks = [0.0] + _interband_ks(h_of_k, Omega, kscale, delta0)
    value, err, neval, conv = _outer_k_integral(chi_k, spec_k, kscale, breaks)
    return ResponseResult(complex(value), float(err), neval, conv)


def kramers_kronig(omega, sigma_real, n_tail_fit: int = 3):
    """Hilbert-transform reconstruction of ``sigma''`` from sampled
    ``sigma'`` (even in ``Omega``), with a ``c/Omega^2`` tail model beyond
    the sampled window.

    Parameters
    ----------
    omega : array
        Ascending non-negative sample frequencies (the even extension to
        negative frequencies is implied).
    sigma_real : array
        ``sigma'(omega)`` samples.

    Returns
    -------
    (sigma_imag, est_error)
        ``sigma''`` on the input grid and a grid-resolution error bound
        (computed by comparing against the half-resolution result).

    Raises
    ------
    InsufficientGridError
        Fewer than 16 samples, non-ascending grid, or a window so narrow
        that the fitted tail still carries more than 5% of the peak.
    """
    omega = np.asarray(omega, dtype=float)
    sig = np.asarray(sigma_real, dtype=float)
    if omega.ndim != 1 or omega.size != sig.size:
        raise InsufficientGridError("omega and sigma_real must be 1-D and equal length")
    if omega.size < 16:
        raise InsufficientGridError("need at least 16 samples")
    if np.any(np.diff(omega) <= 0) or omega[0] < 0:
        raise InsufficientGridError("omega must be ascending and non-negative")
    peak = float(np.abs(sig).max())
    if peak > 0 and abs(sig[-1]) > 0.05 * peak:
        raise InsufficientGridError(
            "sigma' at the window edge exceeds 5% of the peak; widen the grid")

    w_max = omega[-1]
    c_tail = float(np.mean(sig[-n_tail_fit:] * omega[-n_tail_fit:] ** 2))

    def transform(grid_w, grid_s, out_w):
        # dense uniform resampling of the even extension on [0, w_max]
        dense_n = 4 * grid_w.size
        x = np.linspace(0.0, w_max, dense_n)
        s_of = lambda t: np.interp(np.abs(t), grid_w, grid_s)
        sx = s_of(x)
        gap_min = 0.5 * float(np.min(np.diff(grid_w)))
        out = np.empty(out_w.size)
        for j, w in enumerate(out_w):
            if w == 0.0:
                out[j] = 0.0  # sigma'' is odd
                continue
            sw = float(s_of(w))
            with np.errstate(divide="ignore", invalid="ignore"):
                f = (sx - sw) * 2.0 * w / (x * x - w * w)
            bad = ~np.isfinite(f)
            if np.any(bad):
                # fill the removable singularity with a secant slope
                h = max(1e-6 * max(w_max, 1.0), 1e-12)
                f[bad] = (s_of(w + h) - s_of(w - h)) / (2 * h)
            pv = np.trapz(f, x)
            # window-edge log of the subtraction and of the c/x^2 tail
            # combine; their coefficients cancel as w -> w_max by the fit,
            # and the argument is clamped to half a grid step
            log_ratio = np.log(max(w_max - w, gap_min) / (w_max + w))
            edge = (sw - c_tail / w**2) * log_ratio - 2.0 * c_tail / (w * w_max)
            out[j] = -(pv + edge) / np.pi
        return out

    full = transform(omega, sig, omega)
    half = transform(omega[::2], sig[::2], omega)
    est_error = float(np.max(np.abs(full - half)))
    return full, est_error
