"""Weighted-majority aggregation of all K-state predictors and its reduced network form."""

__version__ = "0.1.0"

from .automata import (
    Alphabet,
    FiniteStatePredictor,
    RunTrace,
    decode,
    encode,
    predict,
    predictor_count,
    run,
    step,
)
from .pool import WeightedPool, mistake_bound, run_aggregator
from .network import MeanFieldNetwork, init_uniform, predict_scores, run_network
from .equivalence import ComparisonConfig, EquivalenceReport, compare, sweep
from .complexity import ComplexityCurve, ComplexityPoint, asymptotic_error, best_k_state, profile

__all__ = [
    "Alphabet",
    "FiniteStatePredictor",
    "RunTrace",
    "decode",
    "encode",
    "predict",
    "predictor_count",
    "run",
    "step",
    "WeightedPool",
    "mistake_bound",
    "run_aggregator",
    "MeanFieldNetwork",
    "init_uniform",
    "predict_scores",
    "run_network",
    "ComparisonConfig",
    "EquivalenceReport",
    "compare",
    "sweep",
    "ComplexityCurve",
    "ComplexityPoint",
    "asymptotic_error",
    "best_k_state",
    "profile",
]
