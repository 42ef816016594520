"""ADMM total-variation strain estimation for ultrasound RF frame pairs.

The package estimates dense displacement and axial strain between two RF
frames by alternating exact quadratic solves with soft-thresholding of
first- and second-order spatial-derivative penalties, refining a dynamic
programming seed.  A convolutional speckle phantom generator and strain
image-quality metrics support end-to-end validation.
"""

__version__ = "0.1.0"

from .admm import (AdmmState, ConvergenceTrace, SolverConfig, objective_value,
                   run, shrink, solve_quadratic, update_dual, update_nu)
from .errors import ConvergenceError, InvalidArgumentError, SingularSystemError
from .field import (DisplacementField, RegParams, RfFrame, StrainImage,
                    interp_bilinear, spatial_gradients, strain_from_displacement)
from .metrics import (EsfResult, MetricsReport, TTestResult, WindowSpec, cnr,
                      cnr_histogram, esf, mssim, paired_ttest, rmse, snr,
                      strain_ratio)
from .operators import (OperatorSet, assemble, build_bias, build_d_prime,
                        build_first_order_axial, build_first_order_lateral,
                        build_first_row_prior, build_second_order_axial,
                        build_second_order_lateral, build_xi, dump_coo)
from .phantom import GroundTruth, PhantomSpec, analytic_displacement, generate, preset_spec
from .seed import SeedParams, dp_seed

__all__ = [
    "AdmmState", "ConvergenceTrace", "ConvergenceError", "DisplacementField",
    "EsfResult", "GroundTruth", "InvalidArgumentError", "MetricsReport",
    "OperatorSet", "PhantomSpec", "RegParams", "RfFrame", "SeedParams",
    "SingularSystemError", "SolverConfig", "StrainImage", "TTestResult",
    "WindowSpec", "analytic_displacement", "assemble", "build_bias",
    "build_d_prime", "build_first_order_axial", "build_first_order_lateral",
    "build_first_row_prior", "build_second_order_axial",
    "build_second_order_lateral", "build_xi", "cnr", "cnr_histogram",
    "dp_seed", "dump_coo", "esf", "generate", "interp_bilinear", "mssim",
    "objective_value", "paired_ttest", "preset_spec", "rmse", "run", "shrink",
    "snr", "solve_quadratic", "spatial_gradients", "strain_from_displacement",
    "strain_ratio", "update_dual", "update_nu",
]
