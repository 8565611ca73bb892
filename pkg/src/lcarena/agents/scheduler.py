"""Ranked scheduler: exploit algorithms one at a time in meta-trained ALC order.

The current algorithm is trained until its validation curve goes stale (the
last two increments are both below ``stale_tol``) or it runs out of curve;
the scheduler then moves to the next algorithm in the ranking and never
returns to one it left. In R1 the first slice given to an algorithm is its
predicted first-point time, and every further slice doubles the previous.
"""
from __future__ import annotations

import numpy as np

from ..metadata import MetaDataset
from .base import Agent
from .ranking import alc_rank_table, first_point_times


class RankedScheduler(Agent):
    name = "ranked_scheduler"
    needs_training = True

    def __init__(self, seed: int = 0, stale_tol: float = 1e-3, **kw):
        super().__init__(seed, **kw)
        self.stale_tol = stale_tol

    def meta_train(self, md: MetaDataset) -> None:
        self.table = alc_rank_table(md)
        self.time_model = first_point_times(md)
        self._last_time = {}
        if md.round == "R1":
            for j in range(md.n_algorithms):
                self._last_time[j] = min(md.r1(d.name, j)[0].times[-1] for d in md.datasets)
        super().meta_train(md)

    def start_episode(self, dataset, algorithms, round):
        super().start_episode(dataset, algorithms, round)
        self.pos = 0
        self.switches = 0
        self.slice_count = 0

    @property
    def current(self) -> int:
        return self.table.order[self.pos]

    def is_stale(self, algo: int) -> bool:
        h = self.history[algo]
        if len(h) < 3:
            return False
        return (h[-1] - h[-2]) < self.stale_tol and (h[-2] - h[-3]) < self.stale_tol

    def _advance(self, finished) -> int:
        while self.pos < len(self.table.order) - 1:
            a = self.current
            if self.is_stale(a):
                self.switches += 1
            elif not finished(a):
                break
            self.pos += 1
            self.slice_count = 0
        return self.current

    def act_r2(self):
        return self.r2_action(self._advance(self.exhausted))

    def act_r1(self):
        a = self._advance(lambda j: self.tau[j] >= self._last_time.get(j, np.inf))
        dt = float(self.time_model[a]) * 2.0 ** self.slice_count
        self.slice_count += 1
        return self.r1_action(a, dt)
