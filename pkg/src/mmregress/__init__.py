"""Linear regression with a sparsely shuffled response vector.

Recovers a permutation ``P`` with few displaced entries and coefficients
``beta`` such that ``P y ~ X beta``, by greedy swap local search on the
profiled least-squares objective ``||(I - H) P y||^2``.
"""
from .altmin import altmin_solve, sort_match
from .datagen import GroundTruth, ProblemInstance, gen_instance, read_instance, write_instance
from .diagnostics import (EvalMetrics, evaluate, exhaustive_solve, measure_assumptions,
                          one_step_decrease_oracle, restricted_projection_norm)
from .errors import (BadShape, DimensionMismatch, EmptyActiveSet, IndexOutOfRange,
                     MismatchError, MissingTruth, RankDeficient, TooLarge, WitnessNotFound)
from .fast_search import build_staircases, fast_best_swap, staircase_argmin
from .linalg import ProjectionOperator, factorize
from .local_search import (SearchContext, SolverConfig, SolverState, SolveReport,
                           best_swap_exact, solve, step, swap_delta_exact)
from .permutation import SparsePermutation

__version__ = "0.1.0"
