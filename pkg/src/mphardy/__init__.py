"""Numerics for many-particle Hardy inequalities.

Submodules
----------
geometry     pair and triple kernels (circumradius, Menger kernel)
fields       vector fields with closed-form divergences
bounds       closed-form constants
trials       trial functions with gradients, samplers and closed forms
estimate     Monte Carlo means, ratio estimators, Metropolis sampling
quadrature   deterministic radial and tensor quadrature
functionals  Rayleigh quotients and inequality checks
optimize     curvature-ratio search, sharpness scans, quotient minimisation
cli          the ``mphardy`` command
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundReport,
    RationalFlux,
    bound_table,
    fermi_bound,
    gaussian_upper_bound,
    hardy_lower_bound,
    magnetic_constant,
    naive_bound,
)
from .estimate import MCEstimate, mc_mean, mc_ratio, metropolis_sampler  # noqa: E402
from .functionals import (  # noqa: E402
    QuotientResult,
    ab_mode_quotient,
    div_lemma_bound,
    divmain_check,
    fermi_quotient,
    hardy_quotient,
    nn_identity_residual,
    odd_quotient,
    scaling_demo,
)
from .geometry import Configuration, circumradius_inv_sq, menger_b, pair_density, triple_density  # noqa: E402
from .optimize import WeightedMeasure, beta_delta, k_objective, maximize_K, minimize_quotient  # noqa: E402
from .trials import (  # noqa: E402
    SharpnessParams,
    ab_mode,
    gaussian_product,
    odd_gaussian,
    sharpness_1d,
    slater_gaussian,
)
