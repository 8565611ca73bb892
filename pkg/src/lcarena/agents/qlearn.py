"""Tabular double Q-learning, optionally with one table pair per dataset cluster.

State: (remaining-budget decile, number of distinct algorithms tried so far,
capped at 3). Action: the algorithm to train next; R2 queries it at its
next grid fraction, R1 gives it the next time portion.

Reward is the step's contribution to the final validation-based ALC: when
the best validation score rises from ``v`` to ``v'`` at wallclock ``w``, the
agent curve gains ``(v' - v) * (T - w) / T`` of area. Rewards summed over an
episode equal the (linear) validation ALC.

The clustered variant runs K-means on standardized dataset meta-features
and learns one table pair per cluster; at meta-test time a dataset is routed
to the nearest centroid.
"""
from __future__ import annotations

import numpy as np

from ..envs import make_env
from ..metadata import DatasetMeta, MetaDataset
from .base import Agent, make_rng
from .kmeans import assign, kmeans

N_BUDGET_BINS = 10
N_TRIED_BINS = 4
TASK_TYPES = ("binary", "multiclass", "multilabel", "regression")
MAX_TRAIN_STEPS = 2000


class NotTrainableError(ValueError):
    pass


def meta_features(ds: DatasetMeta) -> list[float]:
    feats = [np.log10(max(ds.n_train, 1)), np.log10(max(ds.n_features, 1)), float(ds.is_sparse)]
    feats += [1.0 if ds.task_type == t else 0.0 for t in TASK_TYPES]
    feats += [float(ds.extra[k]) for k in sorted(ds.extra)]
    return feats


class DoubleQAgent(Agent):
    name = "ddqn"
    needs_training = True

    def __init__(self, seed: int = 0, n_clusters: int | None = None, epochs: int = 50,
                 alpha: float = 0.1, gamma: float = 0.95, eps_start: float = 1.0,
                 eps_end: float = 0.05, kmeans_iters: int = 100, **kw):
        super().__init__(seed, **kw)
        if n_clusters is not None and n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        for name, v in (("eps_start", eps_start), ("eps_end", eps_end)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        self.n_clusters = n_clusters
        self.epochs = epochs
        self.alpha = alpha
        self.gamma = gamma
        self.eps_start = eps_start
        self.eps_end = eps_end
        self.kmeans_iters = kmeans_iters
        self.epsilon = 0.0
        self._learning = False

    # -- state encoding ----------------------------------------------------

    def state(self) -> tuple[int, int]:
        frac = self.remaining / self.T if self.T > 0 else 0.0
        budget = min(N_BUDGET_BINS - 1, max(0, int(frac * N_BUDGET_BINS)))
        return budget, min(self.n_tried, N_TRIED_BINS - 1)

    def q_values(self, cluster: int, state) -> np.ndarray:
        return self.qa[cluster][state] + self.qb[cluster][state]

    # -- meta-training -----------------------------------------------------

    def _features(self, datasets) -> np.ndarray:
        X = np.array([meta_features(d) for d in datasets], dtype=float)
        return (X - self.feat_mean) / self.feat_scale

    def meta_train(self, md: MetaDataset) -> None:
        if not md.datasets:
            raise NotTrainableError("cannot meta-train on an empty slice")
        self.M_train = md.n_algorithms
        raw = np.array([meta_features(d) for d in md.datasets], dtype=float)
        self.feat_mean = raw.mean(axis=0)
        std = raw.std(axis=0)
        self.feat_scale = np.where(std > 0, std, 1.0)
        if self.n_clusters is None:
            self.centers = np.zeros((1, raw.shape[1]))
            labels = np.zeros(len(md.datasets), dtype=int)
        else:
            X = self._features(md.datasets)
            self.centers, labels = kmeans(X, self.n_clusters, make_rng(self.seed, 11),
                                          n_iter=self.kmeans_iters)
        shape = (N_BUDGET_BINS, N_TRIED_BINS, md.n_algorithms)
        self.qa = [np.zeros(shape) for _ in self.centers]
        self.qb = [np.zeros(shape) for _ in self.centers]
        self.trained = True
        for c in range(len(self.centers)):
            members = [md.datasets[i] for i in range(len(md.datasets)) if labels[i] == c]
            self._train_cluster(md, c, members)
        self._learning = False
        self.epsilon = 0.0

    def _train_cluster(self, md: MetaDataset, cluster: int, members) -> None:
        rng = make_rng(self.seed, 7, cluster)
        names = [d.name for d in members]
        for epoch in range(self.epochs):
            frac = epoch / max(self.epochs - 1, 1)
            eps = self.eps_start + (self.eps_end - self.eps_start) * frac
            for i in rng.permutation(len(names)):
                self._train_episode(md, md.dataset(names[int(i)]), cluster, eps, rng)

    def _train_episode(self, md, ds, cluster, eps, rng) -> None:
        env = make_env(md, ds.name)
        obs = env.reset()
        self.start_episode(ds, md.algorithms, md.round)
        self.cluster = cluster
        self.epsilon = eps
        self._learning = True
        self._train_rng = rng
        self.observe(obs)
        for _ in range(MAX_TRAIN_STEPS):
            s = self.state()
            before = self._best()
            a = self._pick(s)
            obs = env.step(self._action_for(a))
            self.observe(obs)
            r = (self._best() - before) * (self.T - env.wallclock) / self.T
            self._update(s, a, r, self.state(), obs.done)
            if obs.done:
                break
        self._learning = False

    def _best(self) -> float:
        return self.best_overall if self.best_overall > -np.inf else 0.0

    def _update(self, s, a, r, s2, done) -> None:
        c = self.cluster
        if self._train_rng.uniform() < 0.5:
            upd, ev = self.qa[c], self.qb[c]
        else:
            upd, ev = self.qb[c], self.qa[c]
        target = r
        if not done:
            a2 = int(np.argmax(upd[s2]))
            target += self.gamma * ev[s2][a2]
        upd[s][a] += self.alpha * (target - upd[s][a])

    # -- acting ------------------------------------------------------------

    def start_episode(self, dataset, algorithms, round):
        super().start_episode(dataset, algorithms, round)
        if len(algorithms) != self.M_train:
            raise ValueError("portfolio size differs from meta-training")
        self.remaining = self.T
        if not self._learning:
            self.cluster = int(assign(self._features([dataset]), self.centers)[0])

    def observe(self, obs) -> None:
        super().observe(obs)
        if obs is not None:
            self.remaining = obs.remaining_budget

    def _pick(self, s) -> int:
        if self._learning and self._train_rng.uniform() < self.epsilon:
            return int(self._train_rng.integers(self.M))
        return int(np.argmax(self.q_values(self.cluster, s)))

    def _action_for(self, a: int):
        if self.round == "R2":
            return self.r2_action(a)
        return self.r1_action(a, self.portion(self.n_queries[a]))

    def act_r2(self):
        return self._action_for(self._pick(self.state()))

    def act_r1(self):
        return self._action_for(self._pick(self.state()))

    def greedy_action(self, cluster: int = 0, state=(N_BUDGET_BINS - 1, 0)) -> int:
        return int(np.argmax(self.q_values(cluster, state)))


class ClusteredQAgent(DoubleQAgent):
    name = "clustered_q"

    def __init__(self, seed: int = 0, n_clusters: int = 12, **kw):
        super().__init__(seed, n_clusters=n_clusters, **kw)
