"""Resilient set-function maximization over matroids against worst-case removals."""

from .bounds import bound_monotone, bound_submodular_matroid, bound_submodular_uniform, h
from .errors import ContractError, GuardExceeded, InputError, ResilimatError, UndefinedCurvatureError
from .matroid import (
    GroundSet,
    PartitionMatroid,
    RestrictedMatroid,
    TransversalMatroid,
    UniformMatroid,
    is_independent,
    rank,
    restrict,
    subset_matroid,
    verify_matroid_axioms,
)
from .oracles import greedy_nonresilient, optimal_resilient, random_feasible, worst_case_removal
from .setfn import (
    SetFunction,
    check_monotone,
    check_submodular,
    curvature_kappa,
    make_concave_over_modular,
    make_coverage,
    make_logdet,
    make_modular,
    total_curvature_exact,
)
from .solver import SolverOutput, evaluation_budget, solve_resilient

__version__ = "0.1.0"
