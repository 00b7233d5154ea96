"""Samplers for the generative models and the Monte Carlo experiment harness."""

from taildep.simulate.experiment import (
    DEFAULT_K_GRID,
    ELLIPTICAL_HEADER,
    FIGURES,
    TWO_POINT_HEADER,
    ExperimentConfig,
    ExperimentResult,
    Scale,
    figure_config,
    reproduce_figure,
    run_experiment,
)
from taildep.simulate.samplers import (
    EllipticalModelConfig,
    FactorLaw,
    FactorModelConfig,
    Generator,
    sample_elliptical,
    sample_factor,
    sample_max_linear,
)

__all__ = [
    "DEFAULT_K_GRID",
    "ELLIPTICAL_HEADER",
    "FIGURES",
    "TWO_POINT_HEADER",
    "ExperimentConfig",
    "ExperimentResult",
    "Scale",
    "figure_config",
    "reproduce_figure",
    "run_experiment",
    "EllipticalModelConfig",
    "FactorLaw",
    "FactorModelConfig",
    "Generator",
    "sample_elliptical",
    "sample_factor",
    "sample_max_linear",
]
