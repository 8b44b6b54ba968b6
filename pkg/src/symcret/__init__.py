"""Simulation relations, reach-avoid synthesis, and controller concretization
for finite transition control systems, with exact 1-D interval abstractions."""

from .core import (
    Controller,
    ContractError,
    ControllerUndefinedError,
    DomainError,
    FiniteTransitionSystem,
    ReachAvoidSpec,
    SpecVerdict,
    SymcretError,
    Trajectory,
    bounded_behavior,
    check_spec,
    controlled_system,
    default_horizon,
    maximal_trajectories,
)
from .relations import (
    ExtendedRelation,
    Interface,
    Relation,
    RelationCheckError,
    RelationKind,
    RelationVerdict,
    RelationWitness,
    StrictnessError,
    check_asr,
    check_frr,
    check_mcr,
    check_relation,
    compose,
    extended_relation,
    maximal_interface,
    mcr_extension,
    replay_witness,
    translate_spec,
    validate_interface,
)
from .synthesis import (
    BudgetExceededError,
    SynthesisResult,
    controllable_predecessor,
    controller_count,
    enumerate_controllers,
    is_sub_controller,
    losing_initial_states,
    synthesize_reach_avoid,
    winning_region,
)
from .concretize import (
    BrokenCertificateError,
    DynamicConcretizer,
    DynamicConcretizerState,
    DynamicRun,
    closed_loop_run,
    closed_loop_tree,
    dynamic_init,
    dynamic_step,
    enumerate_dynamic_runs,
    lexicographic,
    memoryless_controller,
    scripted,
)
from .oracle import (
    AllControllersVerdict,
    CrosscheckFailure,
    CrosscheckReport,
    PropertyVerdict,
    PropertyWitness,
    check_controlled_simulability,
    check_memoryless_concretization,
    check_memoryless_concretization_all_controllers,
    default_horizon_pair,
    replay_memoryless_witness,
    run_crosscheck,
)
from .interval import (
    AbstractInput,
    AffineMap,
    CellCover,
    Fig8Case,
    Fig8Report,
    IntervalCell,
    OutOfDomainError,
    affine_image,
    build_abstraction,
    fig8_affine_inputs,
    fig8_constant_inputs,
    fig8_cover,
    fig8_target_spec,
    interval_covered,
    prove_frr_infeasible_fig8,
    quantize,
    verify_asr_interval,
    verify_mcr_interval,
)
from .fixtures import Fig5, fig5, verify_fig5_consistency

__version__ = "0.1.0"
