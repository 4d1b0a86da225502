"""Frequency probability (von Mises collectives) and a GHZ laboratory."""
from .collectives import (
    Collective,
    FrequencyTable,
    IIDGenerator,
    LabelSet,
    OscillatingGenerator,
    StabilizationVerdict,
    constant_tolerance,
    fit_schedule,
    frequency_table,
    geometric_schedule,
    oscillating_generator,
    relative_frequency,
    sqrt_tolerance,
    stabilization_audit,
)
from .combining import (
    PairedCollective,
    combinability_audit,
    conditional_frequency,
    derived_subsequence,
    independence_audit,
    pair,
)
from .ghz import (
    CANONICAL_SETTINGS,
    GHZ_CONSTRAINTS,
    Setting,
    TripleState,
    correlation,
    gedanken_audit,
    joint_feasibility,
    lhv_enumerate,
    outcome_distribution,
    sample_setting_collective,
)
from .measures import (
    FiniteMeasure,
    HiddenSpace,
    ObservableTable,
    build_singular_resolution,
    event_probability,
    ghz_pointwise_identity,
    is_absolutely_continuous,
    is_equivalent,
    is_singular,
    kolmogorov_contradiction,
    product_event,
    radon_nikodym,
)
from .randomness import PlaceSelection, apply_selection, randomness_audit

__version__ = "0.1.0"
