"""Safety analysis of synchronous parallel systems.

Models are finite automata stepping in lock-step; declared failure modes are
woven into the state space (rate-driven modes as two-state automata, demand-
driven modes folded into their target component). On top of the composed
state space the package computes minimal critical sets of failure modes,
bounded-horizon hazard probabilities (exact value iteration and Monte Carlo),
fault-tree-style upper bounds, and discretization-error reports.

The heavy lifting happens in the compiled extension module; this package just
re-exports it under stable names.
"""

from ._core import (
    CapacityError,
    Model,
    approximation_error,
    check_conservative,
    dcca,
    fta_bound,
    geometric_cdf,
    hazard_curve,
    hazard_probability,
    load_model,
    monte_carlo,
    parse_model,
    pin_failures,
    print_model,
    rate_to_step_probability,
    validate,
)

__all__ = [
    "CapacityError",
    "Model",
    "approximation_error",
    "check_conservative",
    "dcca",
    "fta_bound",
    "geometric_cdf",
    "hazard_curve",
    "hazard_probability",
    "load_model",
    "monte_carlo",
    "parse_model",
    "pin_failures",
    "print_model",
    "rate_to_step_probability",
    "validate",
]

__version__ = "0.1.0"
