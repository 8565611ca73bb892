"""Agent interface and the per-episode bookkeeping every policy shares."""
from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from ..curves import P_GRID, grid_index
from ..envs import ActionR1, ActionR2, ObservationR2
from ..metadata import AlgoMeta, DatasetMeta, MetaDataset

# Fractions of the time budget handed out, in turn, by Round 1 policies.
PORTIONS = (0.01, 0.02, 0.05, 0.1)


class NotTrainedError(RuntimeError):
    pass


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


class Agent:
    """Base class for meta-learning policies.

    Lifecycle: ``meta_train(slice)`` once, then for every episode
    ``start_episode(dataset, algorithms, round)`` followed by repeated
    ``suggest(observation)``. The first ``suggest`` of an episode receives
    the environment's reset observation.

    Subclasses implement ``act_r1`` / ``act_r2``; ``observe`` keeps the
    common state (what has been revealed so far) up to date.
    """

    name = "agent"
    needs_training = False

    def __init__(self, seed: int = 0, portions: Sequence[float] = PORTIONS):
        self.seed = int(seed)
        self.portions = tuple(float(x) for x in portions)
        self.trained = False

    # -- lifecycle ---------------------------------------------------------

    def meta_train(self, md: MetaDataset) -> None:
        self.trained = True

    def start_episode(self, dataset: DatasetMeta, algorithms: Sequence[AlgoMeta], round: str) -> None:
        if self.needs_training and not self.trained:
            raise NotTrainedError(f"{self.name}: meta_train must be called before suggest")
        self.dataset = dataset
        self.round = round
        self.M = len(algorithms)
        self.T = float(dataset.time_budget_T)
        self.rng = make_rng(self.seed, name_key(dataset.name))
        self.n_queries = [0] * self.M
        self.history: list[list[float]] = [[] for _ in range(self.M)]  # validation scores
        self.best_valid = [-np.inf] * self.M
        self.next_idx = [0] * self.M  # R2: next grid index per algorithm
        self.tau = [0.0] * self.M  # R1: cumulative time per algorithm
        self.n_tried = 0
        self.best_overall = -np.inf
        self.n_steps = 0
        self.last_obs = None

    def suggest(self, obs):
        if not hasattr(self, "round"):
            raise NotTrainedError(f"{self.name}: start_episode was not called")
        self.observe(obs)
        action = self.act_r1() if self.round == "R1" else self.act_r2()
        self.n_steps += 1
        return action

    # -- bookkeeping -------------------------------------------------------

    def observe(self, obs) -> None:
        self.last_obs = obs
        if obs is None or obs.algo is None:
            return
        a = obs.algo
        if not self.n_queries[a]:
            self.n_tried += 1
        self.n_queries[a] += 1
        if isinstance(obs, ObservationR2):
            self.next_idx[a] = max(self.next_idx[a], grid_index(obs.p) + 1)
            scores = () if obs.r_valid is None else (obs.r_valid,)
        else:
            self.tau = list(obs.frontier)
            scores = [s for _, s in obs.revealed]
        for s in scores:
            self.history[a].append(s)
            if s > self.best_valid[a]:
                self.best_valid[a] = s
                if s > self.best_overall:
                    self.best_overall = s

    @property
    def tried(self) -> list[int]:
        return [j for j in range(self.M) if self.n_queries[j]]

    def incumbent(self, default: int) -> int:
        """Algorithm with the highest validation score observed so far."""
        best = int(np.argmax(self.best_valid))
        return best if np.isfinite(self.best_valid[best]) else default

    def exhausted(self, algo: int) -> bool:
        return self.next_idx[algo] >= len(P_GRID)

    def r2_action(self, algo: int) -> ActionR2:
        """Query ``algo`` at its next grid point (1.0 again once exhausted)."""
        k = min(self.next_idx[algo], len(P_GRID) - 1)
        return ActionR2(int(algo), P_GRID[k])

    def portion(self, i: int) -> float:
        return self.portions[i % len(self.portions)] * self.T

    def r1_action(self, algo: int, delta_t: float, incumbent: int | None = None) -> ActionR1:
        inc = self.incumbent(algo) if incumbent is None else incumbent
        return ActionR1(int(algo), float(delta_t), int(inc))

    def act_r1(self) -> ActionR1:
        raise NotImplementedError

    def act_r2(self) -> ActionR2:
        raise NotImplementedError
