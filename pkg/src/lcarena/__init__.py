"""Benchmark arena for meta-learning from pre-computed learning curves."""
__version__ = "0.1.0"

from .curves import (AgentCurve, AlcConfig, ScoreReport, SizeCurveTriplet, TimeCurve,
                     aggregate, alc, value_at, worst_of_runs)
from .metadata import MetaDataset, load, make_kfold, make_phase_split, save

__all__ = [
    "AgentCurve", "AlcConfig", "MetaDataset", "ScoreReport", "SizeCurveTriplet", "TimeCurve",
    "__version__", "aggregate", "alc", "load", "make_kfold", "make_phase_split", "save",
    "value_at", "worst_of_runs",
]
