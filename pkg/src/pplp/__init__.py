"""Piecewise-polynomial densities for hybrid probabilistic logic programs.

Learn valid densities from samples (B-spline mixtures scored by BIC),
embed them as weighted atoms, answer interval queries by exact symbolic
integration over an enumerated choice space, and induce rules over the
discretized predicates.
"""

from .density import (
    DensityModel,
    SplineBasis,
    bic_score,
    build_basis,
    build_pp_structure,
    fit_coefficients,
    fit_supervised,
)
from .discretize import Discretization, Method, entropy_distance, equal_frequency, equal_width
from .engine import (
    DomainPartition,
    GroundProgram,
    QueryResult,
    answer_queries,
    conditioned_probability,
    ground,
    partition_domains,
    success_probability,
)
from .errors import (
    ChoiceSpaceError,
    ContractError,
    DegenerateInputError,
    InconsistentEvidenceError,
    InvalidIntervalError,
    ParseError,
    PplpError,
)
from .polynomials import (
    HyperCube,
    MultivariatePP,
    MultivariatePolynomial,
    PiecewisePolynomial,
    Polynomial,
    poly_arith,
)
from .program import Program, parse, print_program, substitute
from .rulelearn import Hypothesis, coverage_table, induce, score_hypothesis
from .transform import DiscretizedProgram, LearningTask, discretize_program, emit_learning_task

__version__ = "0.1.0"
