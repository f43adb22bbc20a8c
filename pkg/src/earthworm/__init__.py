"""Earthworm: hole dynamics of a self-interacting lattice random walk.

A walker on the d-dimensional integer lattice pushes soil ahead of itself:
each step either creates a hole at its new position or transfers the
nearest hole ahead to it. This package simulates the process with an
indexed hole set (fast nearest-hole-ahead queries), verifies the engine
against a naive oracle and a restarted-worm coupling, runs reproducible
Monte Carlo sweeps, and estimates the growth and tan-point exponents.
"""

from .checkpoint import CheckpointError, checkpoint_roundtrip, load_state, save_state
from .coupling import CouplingReport, restart, verify_coupling
from .dynamics import (
    Direction,
    LineIndex,
    RunSummary,
    StepEvent,
    StepOutcome,
    TrackingDisabledError,
    WormState,
    apply_move,
    holes_snapshot,
    is_tan_point,
    nearest_hole_ahead,
    new_state,
    run,
    step,
)
from .montecarlo import ExperimentPlan, SampleRow, SampleTable, derive_seed, run_sweep
from .oracle import EquivalenceReport, NaiveState, naive_apply_move, naive_new_state, replay_equivalence
from .rng import Xoshiro256PP, splitmix64_stream
from .stats import (
    ComponentStats,
    KsResult,
    PaleyZygmundCheck,
    RegressionFit,
    hole_components,
    ks_normal,
    ks_pvalue,
    ols_loglog,
    paley_zygmund_check,
    tan_point_exponent,
    theorem_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ComponentStats",
    "CouplingReport",
    "Direction",
    "EquivalenceReport",
    "ExperimentPlan",
    "KsResult",
    "LineIndex",
    "NaiveState",
    "PaleyZygmundCheck",
    "RegressionFit",
    "RunSummary",
    "SampleRow",
    "SampleTable",
    "StepEvent",
    "StepOutcome",
    "TrackingDisabledError",
    "WormState",
    "Xoshiro256PP",
    "apply_move",
    "checkpoint_roundtrip",
    "derive_seed",
    "hole_components",
    "holes_snapshot",
    "is_tan_point",
    "ks_normal",
    "ks_pvalue",
    "load_state",
    "naive_apply_move",
    "naive_new_state",
    "nearest_hole_ahead",
    "new_state",
    "ols_loglog",
    "paley_zygmund_check",
    "replay_equivalence",
    "restart",
    "run",
    "run_sweep",
    "save_state",
    "splitmix64_stream",
    "step",
    "tan_point_exponent",
    "theorem_fraction",
    "verify_coupling",
]
