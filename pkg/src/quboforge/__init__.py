"""Compile combinatorial problems to QUBO/Ising, solve, and simulate annealing."""

from __future__ import annotations

from ._kernels import BACKEND, HAS_NUMBA, USE_NUMBA
from .bench import (
    DEFAULT_COEFF_SET,
    BenchConfig,
    BenchRow,
    BenchTable,
    ScalingFit,
    SolverSpec,
    bench_run,
    random_instance,
    scaling_fit,
)
from .graphs import HardwareGraph, check_compatible, chimera_graph
from .models import (
    BIT,
    SPIN,
    Assignment,
    IsingModel,
    QuboModel,
    all_energies,
    config_from_index,
    energy,
    ising_to_qubo,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    qubo_to_ising,
)
from .dubins import (
    DubinsPath,
    TargetTriple,
    dubins_candidates,
    dubins_distance,
    dubins_matrix,
    dubins_path,
    targets_from_csv,
)
from .faulttree import (
    FaultTree,
    Gate,
    cut_weight,
    faulttree_compile,
    faulttree_decode,
    faulttree_from_dict,
    gate_penalty,
    two_input_form_labels,
)
from .learning import (
    PointSet,
    QimsBatchResult,
    StructuredModel,
    StructuredTrainResult,
    WeakClassifierMatrix,
    box_membership,
    cut_value,
    imagematch_compile,
    qboost_classify,
    qboost_compile,
    qcut_clusters,
    qcut_compile,
    qims_batch,
    qims_compile,
    qims_covered,
    reference_conflict,
    structured_energy,
    structured_objective,
    structured_train,
)
from .qa import (
    ControlHamiltonian,
    EvolveResult,
    QuantumState,
    SpectrumPoint,
    SpectrumScan,
    evolve,
    spectrum_scan,
)
from .planning import (
    Operator,
    PlanLayout,
    PlanningProblem,
    PlanReport,
    PlanViolation,
    SimulationResult,
    constant_propagation,
    plan_compile,
    plan_decode_validate,
    plan_layout,
    planning_problem_from_dict,
    simulate_plan,
)
from .prob import (
    BlackboxResult,
    BoltzmannModel,
    HardwareFit,
    Population,
    blackbox_minimize,
    crf_loglik,
    crf_loglik_gradient,
    exact_boltzmann,
    filter_population,
    fit_hardware_model,
    gibbs_sample,
    index_bits,
)
from .sat import (
    Clause3,
    clauses_from_dimacs,
    count_violated,
    sat3_compile,
    sat3_random_instance,
)
from .solvers import (
    EffortStat,
    SaSchedule,
    SolveResult,
    brute_force,
    optimal_energy,
    simulated_annealing,
    tabu_search,
    time_to_target,
)
from .uav import (
    tour_decode,
    tour_length,
    tsp_compile_matrix,
    uav_tsp_compile,
)

__all__ = [
    "BACKEND",
    "BIT",
    "DEFAULT_COEFF_SET",
    "HAS_NUMBA",
    "SPIN",
    "USE_NUMBA",
    "Assignment",
    "BenchConfig",
    "BenchRow",
    "BenchTable",
    "BlackboxResult",
    "BoltzmannModel",
    "Clause3",
    "ControlHamiltonian",
    "DubinsPath",
    "EffortStat",
    "EvolveResult",
    "FaultTree",
    "Gate",
    "HardwareFit",
    "HardwareGraph",
    "IsingModel",
    "Operator",
    "PlanLayout",
    "PlanReport",
    "PlanViolation",
    "PlanningProblem",
    "PointSet",
    "Population",
    "QimsBatchResult",
    "QuantumState",
    "QuboModel",
    "SaSchedule",
    "ScalingFit",
    "SimulationResult",
    "SolveResult",
    "SolverSpec",
    "SpectrumPoint",
    "SpectrumScan",
    "StructuredModel",
    "StructuredTrainResult",
    "TargetTriple",
    "WeakClassifierMatrix",
    "all_energies",
    "bench_run",
    "blackbox_minimize",
    "box_membership",
    "brute_force",
    "check_compatible",
    "chimera_graph",
    "clauses_from_dimacs",
    "config_from_index",
    "constant_propagation",
    "count_violated",
    "crf_loglik",
    "crf_loglik_gradient",
    "cut_value",
    "cut_weight",
    "dubins_candidates",
    "dubins_distance",
    "dubins_matrix",
    "dubins_path",
    "energy",
    "evolve",
    "exact_boltzmann",
    "faulttree_compile",
    "faulttree_decode",
    "faulttree_from_dict",
    "filter_population",
    "fit_hardware_model",
    "gate_penalty",
    "gibbs_sample",
    "imagematch_compile",
    "index_bits",
    "ising_to_qubo",
    "model_from_dict",
    "model_from_json",
    "model_to_dict",
    "model_to_json",
    "optimal_energy",
    "plan_compile",
    "plan_decode_validate",
    "plan_layout",
    "planning_problem_from_dict",
    "qboost_classify",
    "qboost_compile",
    "qcut_clusters",
    "qcut_compile",
    "qims_batch",
    "qims_compile",
    "qims_covered",
    "qubo_to_ising",
    "random_instance",
    "reference_conflict",
    "sat3_compile",
    "sat3_random_instance",
    "scaling_fit",
    "simulate_plan",
    "simulated_annealing",
    "spectrum_scan",
    "structured_energy",
    "structured_objective",
    "structured_train",
    "tabu_search",
    "targets_from_csv",
    "time_to_target",
    "tour_decode",
    "tour_length",
    "tsp_compile_matrix",
    "two_input_form_labels",
    "uav_tsp_compile",
]

__version__ = "0.1.0"
