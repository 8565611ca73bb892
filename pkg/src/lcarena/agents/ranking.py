"""Rank tables and timing models learned from a meta-training slice."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..curves import AgentCurve, AlcConfig, alc
from ..metadata import MetaDataset


@dataclass(frozen=True)
class RankTable:
    """``order`` lists algorithm ids best first; ``score`` is indexed by algo id."""

    order: tuple[int, ...]
    score: tuple[float, ...]
    kind: str

    @property
    def top(self) -> int:
        return self.order[0]


def final_valid_matrix(md: MetaDataset) -> np.ndarray:
    out = np.zeros((len(md.datasets), md.n_algorithms))
    for i, ds in enumerate(md.datasets):
        for j in range(md.n_algorithms):
            if md.round == "R1":
                s = md.r1(ds.name, j)[0].scores
            else:
                s = md.r2(ds.name, j).valid
            out[i, j] = s[-1] if s else 0.0
    return out


def average_rank_table(md: MetaDataset) -> RankTable:
    """Borda count: per-dataset ranks of final validation score, averaged.

    Rank 1 is best; equal scores share the average rank. Equal average
    ranks are ordered by algorithm id.
    """
    if not md.datasets:
        raise ValueError("empty meta-training slice")
    scores = final_valid_matrix(md)
    ranks = np.vstack([rankdata(-row, method="average") for row in scores])
    avg = ranks.mean(axis=0)
    order = tuple(int(j) for j in sorted(range(md.n_algorithms), key=lambda j: (avg[j], j)))
    return RankTable(order, tuple(float(v) for v in avg), "average_rank")


def solo_curve(md: MetaDataset, name: str, algo: int, use_valid: bool = False) -> AgentCurve:
    """Agent curve of a policy that only ever trains ``algo``.

    R1: the algorithm's own curve. R2: queries p = 0.1, 0.2, ... in order,
    with the best-validation incumbent rule, until the budget runs out.
    """
    T = md.dataset(name).time_budget_T
    if md.round == "R1":
        valid, test = md.r1(name, algo)
        c = valid if use_valid else test
        return AgentCurve(tuple(zip(c.times, c.scores)), T)
    c = md.r2(name, algo)
    steps, spent, best, value = [], 0.0, -np.inf, 0.0
    for pos in range(len(c.p)):
        spent += c.cost[pos]
        if spent > T:
            break
        if c.valid[pos] > best:
            best = c.valid[pos]
            value = (c.valid if use_valid else c.test)[pos]
        steps.append((spent, value))
    return AgentCurve(tuple(steps), T)


def alc_rank_table(md: MetaDataset, cfg: AlcConfig | None = None) -> RankTable:
    """Algorithms ordered by mean solo ALC over the slice, descending."""
    if not md.datasets:
        raise ValueError("empty meta-training slice")
    mean = np.zeros(md.n_algorithms)
    for ds in md.datasets:
        for j in range(md.n_algorithms):
            mean[j] += alc(solo_curve(md, ds.name, j), cfg)
    mean /= len(md.datasets)
    order = tuple(int(j) for j in sorted(range(md.n_algorithms), key=lambda j: (-mean[j], j)))
    return RankTable(order, tuple(float(v) for v in mean), "alc")


def first_point_times(md: MetaDataset) -> np.ndarray:
    """Mean time until an algorithm's first curve point is available.

    R1: time of the first point; R2: cost of the smallest anchor.
    """
    out = np.zeros(md.n_algorithms)
    for j in range(md.n_algorithms):
        vals = []
        for ds in md.datasets:
            if md.round == "R1":
                t = md.r1(ds.name, j)[0].times
                vals.append(t[0] if t else ds.time_budget_T)
            else:
                vals.append(md.r2(ds.name, j).cost[0])
        out[j] = float(np.mean(vals))
    return out
