from .TheoryReport import Assertion, TheoryReport
from .estimators import Z_TOLERANCE, RunningMoments, check_second_moment, check_unbiasedness, forward_gradient_samples
from .heterogeneity import AggregateEstimate, aggregate_forward_estimate, bias_sweep, check_homogeneous_estimate
from .suites import SUITES, SuiteResult, run_suite
from .theory import learning_rate_bound, learning_rate_terms
from .toys import QuadraticModel, single_param_store
from .trend import compare_floors, convergence_trend

__all__ = [
    'Assertion', 'TheoryReport', 'Z_TOLERANCE', 'RunningMoments', 'check_second_moment', 'check_unbiasedness',
    'forward_gradient_samples', 'AggregateEstimate', 'aggregate_forward_estimate', 'bias_sweep',
    'check_homogeneous_estimate', 'SUITES', 'SuiteResult', 'run_suite', 'learning_rate_bound',
    'learning_rate_terms', 'QuadraticModel', 'single_param_store', 'compare_floors', 'convergence_trend',
]
