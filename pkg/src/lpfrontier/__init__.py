"""L1-optimal frontier estimation by linear programming over kernel expansions."""

from ._backend import BACKEND
from .estimator import FrontierEstimate, l1_decomposition, l1_error, lipschitz_audit, surface
from .kernel import QUADRIWEIGHT, CorrectedKernel, compute_functionals
from .lp import LPBuildParams, LPProblem, LPSolution, build_frontier_lp, solve
from .model import FrontierFunction, Sample, make_frontier, sample_support
from .study import StudyConfig, StudyReport, bandwidth_schedule, fit_rate, run_study, theory_constants

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CorrectedKernel",
    "FrontierEstimate",
    "FrontierFunction",
    "LPBuildParams",
    "LPProblem",
    "LPSolution",
    "QUADRIWEIGHT",
    "Sample",
    "StudyConfig",
    "StudyReport",
    "bandwidth_schedule",
    "build_frontier_lp",
    "compute_functionals",
    "fit_rate",
    "l1_decomposition",
    "l1_error",
    "lipschitz_audit",
    "make_frontier",
    "run_study",
    "sample_support",
    "solve",
    "surface",
    "theory_constants",
]
