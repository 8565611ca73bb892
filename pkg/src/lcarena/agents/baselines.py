"""Random Search, Average Rank and Best-on-Samples."""
from __future__ import annotations

import numpy as np

from ..metadata import MetaDataset
from .base import Agent, NotTrainedError
from .ranking import RankTable, average_rank_table, first_point_times


class RandomSearch(Agent):
    """R2: a uniformly random algorithm that still has grid points left, at
    its next p. R1: a random algorithm and a random time portion."""

    name = "random_search"

    def act_r2(self):
        open_algos = [j for j in range(self.M) if not self.exhausted(j)]
        if not open_algos:
            return self.r2_action(int(self.rng.integers(self.M)))
        return self.r2_action(open_algos[int(self.rng.integers(len(open_algos)))])

    def act_r1(self):
        a = int(self.rng.integers(self.M))
        dt = self.portions[int(self.rng.integers(len(self.portions)))] * self.T
        return self.r1_action(a, dt)


class AverageRank(Agent):
    """Always trains the algorithm with the best average rank on the
    meta-training datasets; moves down the table only once an algorithm has
    no grid points left (R2) or its recorded curve is fully revealed (R1)."""

    name = "average_rank"
    needs_training = True

    def meta_train(self, md: MetaDataset) -> None:
        self.table: RankTable = average_rank_table(md)
        self._last_time = {}
        if md.round == "R1":
            for j in range(md.n_algorithms):
                self._last_time[j] = min(md.r1(d.name, j)[0].times[-1] for d in md.datasets)
        super().meta_train(md)

    def start_episode(self, dataset, algorithms, round):
        super().start_episode(dataset, algorithms, round)
        self.pos = 0

    def _current(self, done) -> int:
        while self.pos < len(self.table.order) - 1 and done(self.table.order[self.pos]):
            self.pos += 1
        return self.table.order[self.pos]

    def act_r2(self):
        return self.r2_action(self._current(self.exhausted))

    def act_r1(self):
        a = self._current(lambda j: self.tau[j] >= self._last_time.get(j, np.inf))
        return self.r1_action(a, self.portion(self.n_queries[a]), incumbent=a)


class BestOnSamples(Agent):
    """Probe every algorithm cheaply, then exploit the probe winner.

    R2 probes at p=0.1; R1 probes with a fixed time slice (the meta-trained
    first-point time when available, else 5% of the budget). Probe order is
    the average-rank table when meta-trained, else algorithm id. While
    exploiting, if the exploited algorithm's latest validation score falls
    below the best remaining probe, the agent moves to that runner-up.
    """

    name = "best_on_samples"

    def __init__(self, seed: int = 0, probe_fraction: float = 0.05, **kw):
        super().__init__(seed, **kw)
        self.probe_fraction = probe_fraction
        self.table = None
        self.probe_dt = None

    def meta_train(self, md: MetaDataset) -> None:
        self.table = average_rank_table(md)
        if md.round == "R1":
            self.probe_dt = first_point_times(md)
        super().meta_train(md)

    def start_episode(self, dataset, algorithms, round):
        super().start_episode(dataset, algorithms, round)
        if self.table is not None and len(self.table.order) != self.M:
            raise NotTrainedError("rank table does not match the algorithm portfolio")
        self.order = list(self.table.order) if self.table is not None else list(range(self.M))
        self.probe: dict[int, float] = {}
        self.current = None
        self.abandoned: set[int] = set()
        self.exploit_steps = 0

    def _probe_score(self, j) -> float:
        h = self.history[j]
        return h[0] if h else -np.inf

    def _next_candidate(self, usable) -> int | None:
        cands = [j for j in self.order if j not in self.abandoned and usable(j)]
        if not cands:
            return None
        return max(cands, key=lambda j: (self._probe_score(j), -self.order.index(j)))

    def _choose(self, usable) -> int:
        if self.current is not None and usable(self.current):
            h = self.history[self.current]
            others = [j for j in self.order if j != self.current
                      and j not in self.abandoned and usable(j)]
            runner = max(others, key=self._probe_score, default=None)
            if h and runner is not None and h[-1] < self._probe_score(runner):
                self.abandoned.add(self.current)
                self.current = runner
        else:
            if self.current is not None:
                self.abandoned.add(self.current)
            self.current = self._next_candidate(usable)
        return self.current

    def act_r2(self):
        for j in self.order:
            if not self.n_queries[j]:
                return self.r2_action(j)
        a = self._choose(lambda j: not self.exhausted(j))
        if a is None:
            a = self.incumbent(self.order[0])
        return self.r2_action(a)

    def act_r1(self):
        for j in self.order:
            if not self.n_queries[j]:
                dt = (self.probe_dt[j] if self.probe_dt is not None
                      else self.probe_fraction * self.T)
                return self.r1_action(j, dt)
        a = self._choose(lambda j: True)
        dt = self.portion(self.exploit_steps)
        self.exploit_steps += 1
        return self.r1_action(a, dt)
