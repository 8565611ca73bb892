"""Agent roster and registry."""
from .base import PORTIONS, Agent, NotTrainedError
from .baselines import AverageRank, BestOnSamples, RandomSearch
from .freeze_thaw import FreezeThaw, FreezeThawFit, fit_curve
from .kmeans import kmeans
from .qlearn import ClusteredQAgent, DoubleQAgent, NotTrainableError
from .ranking import RankTable, alc_rank_table, average_rank_table
from .scheduler import RankedScheduler

REGISTRY = {
    cls.name: cls
    for cls in (RandomSearch, AverageRank, BestOnSamples, FreezeThaw,
                DoubleQAgent, ClusteredQAgent, RankedScheduler)
}


def make_agent(kind: str, seed: int = 0, **params) -> Agent:
    try:
        cls = REGISTRY[kind]
    except KeyError:
        raise KeyError(f"unknown agent type {kind!r}; known: {sorted(REGISTRY)}") from None
    return cls(seed=seed, **params)


__all__ = [
    "PORTIONS", "REGISTRY", "Agent", "AverageRank", "BestOnSamples", "ClusteredQAgent",
    "DoubleQAgent", "FreezeThaw", "FreezeThawFit", "NotTrainableError", "NotTrainedError",
    "RandomSearch", "RankTable", "RankedScheduler", "alc_rank_table", "average_rank_table",
    "fit_curve", "kmeans", "make_agent",
]
