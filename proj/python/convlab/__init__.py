"""Python bindings for the convlab experiment library."""

from ._convlab import (
    ConfigError,
    __version__,
    mstar_check,
    perrin_score_sheet,
    refute_uniform,
    regime_experiment,
    run,
    truth_prob_analytic,
    truth_prob_mc,
    validate_config,
)

__all__ = [
    "ConfigError",
    "__version__",
    "mstar_check",
    "perrin_score_sheet",
    "refute_uniform",
    "regime_experiment",
    "run",
    "truth_prob_analytic",
    "truth_prob_mc",
    "validate_config",
]
