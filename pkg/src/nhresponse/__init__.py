"""Linear response for effective non-Hermitian quasiparticle Hamiltonians.

Spectral core (biorthogonal eigensystems, pseudo-metric, isospectral maps),
causal/Matsubara Green's functions under the standard dissipative, PHQM and
postselected prescriptions, Kubo-formula transport by adaptive quadrature,
zero-temperature distribution functions, and the (1+1)-D NH Dirac model
with its closed-form transport oracles.
"""

from . import errors
from .spectral import (
    BiorthoSystem,
    PseudoMetric,
    FrameDirection,
    eig_biortho,
    pseudo_metric,
    isospectral_map,
    transform_observable,
    propagator,
)
from .greens import (
    Framework,
    FrameworkVariant,
    g_retarded,
    g_advanced,
    g_matsubara,
    spectral_function,
    action_kernel,
    matsubara_kernel_sum,
    fermi,
)
from .quadrature import QuadratureSpec, ResponseResult, TailMap, integrate_semi_infinite
from .response import (
    chi_local,
    sigma_optical,
    sigma_dc,
    optical_sum,
    chi_phqm_clean,
    kramers_kronig,
)
from .observables import (
    occupation,
    occupation_integral,
    expectation,
    nhts_density,
    select_ground_state,
)
from .tachyon import (
    TachyonParams,
    Regime,
    PhaseRegime,
    DcFormula,
    OsrFormula,
    regime,
    hamiltonian,
    current_j,
    current_tilde,
    isospectral_closed,
    isospectral_current,
    sigma_dc_closed,
    osr_closed,
)

__version__ = "0.1.0"
