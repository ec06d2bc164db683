"""Time-optimal search plans for Poisson pulsed point sources, with Monte Carlo checks."""

from .core import (
    ApertureLadder,
    CumulativeLoad,
    LoadProfile,
    PriorDensity,
    ReceiverCodebook,
    ReceiverResponse,
    SourceModel,
    StagePlan,
    TrialStats,
    validate,
)
from .multi_receiver import (
    build_codebook,
    decode_segment,
    mean_time_multistage,
    plan_multistage,
    regime_boundaries,
    single_tact_accuracy,
)
from .multi_target import (
    composition_invariance_check,
    optimize_ladder,
    prob_k_in_aperture,
    step_mean_time,
    total_mean_time,
)
from .single_planner import (
    compare_strategies,
    discrete_beta_weights,
    general_onestep_alpha,
    periodic_load_profile,
    periodic_mean_time,
    trichotomy_plan,
    uniform_multistep_ladder,
)

__version__ = "0.1.0"
