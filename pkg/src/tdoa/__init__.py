"""Consistent two-step TDOA source localization."""

__version__ = "0.1.0"

from .errors import TdoaError  # noqa: E402
from .identifiability import check_assumption5, veronese_vector  # noqa: E402
from .likelihood import fisher_information, information_matrix, ml_objective  # noqa: E402
from .linear import assemble, solve_bias_eliminated, solve_biased  # noqa: E402
from .model import (  # noqa: E402
    MeasurementSet,
    NoiseModel,
    SensorArray,
    deploy_fixed_paper_array,
    deploy_uniform_cube,
    range_difference,
    simulate,
)
from .noise_variance import estimate_sigma2  # noqa: E402
from .pipeline import GnConfig, gauss_newton_step, localize  # noqa: E402
