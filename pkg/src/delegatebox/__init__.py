"""Delegated choice with inspection costs: exact mechanisms, bounds, audits."""

from .core import (
    Alternative,
    CapMismatch,
    CostModel,
    CostsNotIdentical,
    DelegateboxError,
    DiscreteDistribution,
    EmptySupport,
    EnumerationLimitExceeded,
    Instance,
    InvalidParameters,
    NegativeValue,
    NotCostless,
    Outcome,
    PolicyIncomplete,
    ProbabilitySumMismatch,
    RegimeMismatch,
    ShapeMismatch,
    StateLimitExceeded,
    as_number,
    expected_of_max,
    expected_value,
    format_number,
    instance_digest,
    instance_from_json,
    instance_to_json,
    iter_realizations,
    make_distribution,
)
from .pandora import (
    Cap,
    PnoiPolicy,
    capped_value_distribution,
    evaluate_policy,
    pnoi_optimal,
    pnoi_value_upper_bound,
    reservation_cap,
    run_policy,
    weitzman_value,
)
from .delegation import (
    WORST_CASE,
    AgentProfile,
    MechanismReport,
    SignalingMechanism,
    Spmi,
    agent_best_response,
    best_closed_selection,
    build_spmi,
    cost_ordered_adversary,
    costly_mechanism,
    deterministic_agent,
    distributional_agent,
    evaluate_signaling,
    evaluate_spmi,
    identical_cost_mechanism,
    maximal_mechanism_costless,
    overinspection_utility,
    prophet_threshold,
    uninspected_selection_mass,
)
from .bounds import AuditReport, audit, upper_bound_costless, upper_bound_costly
from .instances import GeneratorSpec, gen, inspection_only_best

__version__ = "0.1.0"
