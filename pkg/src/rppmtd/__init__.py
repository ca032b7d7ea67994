"""Makespan-minimizing arc routing for truck fleets with onboard drones.

The library generates road-network instances, decodes two-part chromosomes
into synchronized truck/drone plans, and searches them with a hybrid
genetic algorithm plus local refinement.  An exhaustive oracle covers
desk-scale instances for verification.
"""

from .evolution import (
    Evaluator,
    GaConfig,
    GenerationStat,
    Individual,
    RunTrace,
    ScheduleState,
    SearchContext,
    SolveResult,
    adapt_schedules,
    crossover_ox,
    crossover_pmx,
    crossover_segment_preserving,
    diversity,
    fitness,
    generation_step,
    initial_population,
    mutate,
    solve,
    targeted_chromosome,
    targeted_individual,
    tournament_select,
)
from .instances import (
    Edge,
    Instance,
    InstanceError,
    InstanceFormatError,
    MetricTables,
    Node,
    build_metrics,
    drone_leg_time,
    drone_service_time,
    generate_instance,
    load_instance,
    save_instance,
    tau_from_beta,
)
from .local_search import (
    LsContext,
    op_greedy_reassign,
    op_or_opt,
    op_ruin_construct,
    op_sortie_opt,
    op_subseq_reversal,
    refine,
)
from .oracle import OracleResult, OracleSizeError, exhaustive_solve
from .routing import (
    Chromosome,
    Evaluation,
    FleetConfig,
    RoutePlan,
    Sortie,
    TruckRoute,
    decode,
    decode_best,
    evaluate,
    is_valid_chromosome,
    penalized_cost,
    random_chromosome,
)

__version__ = "0.1.0"

__all__ = [
    "Chromosome",
    "Edge",
    "Evaluation",
    "Evaluator",
    "FleetConfig",
    "GaConfig",
    "GenerationStat",
    "Individual",
    "Instance",
    "InstanceError",
    "InstanceFormatError",
    "LsContext",
    "MetricTables",
    "Node",
    "OracleResult",
    "OracleSizeError",
    "RoutePlan",
    "RunTrace",
    "ScheduleState",
    "SearchContext",
    "SolveResult",
    "Sortie",
    "TruckRoute",
    "adapt_schedules",
    "build_metrics",
    "crossover_ox",
    "crossover_pmx",
    "crossover_segment_preserving",
    "decode",
    "decode_best",
    "diversity",
    "drone_leg_time",
    "drone_service_time",
    "evaluate",
    "exhaustive_solve",
    "fitness",
    "generate_instance",
    "generation_step",
    "initial_population",
    "is_valid_chromosome",
    "load_instance",
    "mutate",
    "op_greedy_reassign",
    "op_or_opt",
    "op_ruin_construct",
    "op_sortie_opt",
    "op_subseq_reversal",
    "penalized_cost",
    "random_chromosome",
    "refine",
    "save_instance",
    "solve",
    "targeted_chromosome",
    "targeted_individual",
    "tournament_select",
]
