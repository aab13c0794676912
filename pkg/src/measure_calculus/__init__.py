"""Differential calculus on spaces of finite measures over Euclidean space and the sphere.

Measures are finite particle measures; functionals are plain callables with
optional analytic derivatives; every derivative is also available as a
Richardson-extrapolated finite-difference estimate.
"""

from .calculus import (
    DerivativeEstimate,
    FDConfig,
    FlowConfig,
    centered_extrinsic_fd,
    dirac_gradient,
    extrinsic_fd,
    extrinsic_value,
    flow_map,
    geodesic_shift,
    grad_extrinsic,
    intrinsic_directional,
    l_directional,
    l_field_via_dirac,
    richardson,
)
from .errors import ConfigError, DomainError, InputError, MeasureCalculusError, NumericError
from .functionals import (
    CylindricalSpec,
    DensityPerturbation,
    Functional,
    builtin,
    cylindrical_from_config,
    cylindrical_make,
    linear_perturbation,
    probability_extension,
    quadratic_perturbation,
)
from .geometry import Manifold, distance, exp_map, log_map, parallel_transport, scalar_gradient
from .measures import (
    ParticleMeasure,
    add_dirac,
    convex_combine,
    dirac,
    integrate,
    make_measure,
    optimal_coupling,
    pushforward,
    reweight,
    wasserstein_p,
    zero_measure,
)
from .report import emit_report, render
from .verification import (
    RandomFamily,
    Report,
    check_centered,
    check_counterexample,
    check_dirac_gradient,
    check_dirac_limit,
    check_distribution_derivative,
    check_intrinsic_vs_grad,
    check_intrinsic_vs_l,
    check_lfd_identity,
    check_reweight_identity,
    check_wasserstein_pair,
    l_remainder_ratios,
)

__version__ = "0.1.0"
