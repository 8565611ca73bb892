"""Learning-curve containers and Area-under-Learning-Curve scoring.

Every curve here is a right-continuous step function. Scores are read with
"last recorded value" semantics: the value at time ``t`` is the score of the
last point at or before ``t``, and 0 before the first point.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

P_GRID: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 11))


class EmptyInputError(ValueError):
    pass


class InvalidHorizonError(ValueError):
    pass


def grid_index(p: float) -> int:
    """Index of ``p`` on the ten-point training-fraction grid, or -1."""
    k = int(round(p * 10)) - 1
    if 0 <= k < 10 and abs(P_GRID[k] - p) < 1e-9:
        return k
    return -1


@dataclass(frozen=True)
class TimeCurve:
    times: tuple[float, ...]
    scores: tuple[float, ...]
    metric_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if len(self.times) != len(self.scores):
            raise ValueError("times and scores differ in length")

    def __len__(self):
        return len(self.times)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.scores))


@dataclass(frozen=True)
class SizeCurveTriplet:
    """Per-anchor cost and train/valid/test scores on the training-fraction grid."""

    p: tuple[float, ...]
    cost: tuple[float, ...]
    train: tuple[float, ...]
    valid: tuple[float, ...]
    test: tuple[float, ...]

    def __post_init__(self):
        for name in ("p", "cost", "train", "valid", "test"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = len(self.p)
        if any(len(getattr(self, f)) != n for f in ("cost", "train", "valid", "test")):
            raise ValueError("anchor columns differ in length")

    def anchor(self, p: float) -> int | None:
        """Position of grid fraction ``p`` in this triplet, None if absent."""
        k = grid_index(p)
        if k < 0:
            return None
        target = P_GRID[k]
        for pos, q in enumerate(self.p):
            if q == target:
                return pos
        return None


@dataclass(frozen=True)
class AgentCurve:
    steps: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self):
        object.__setattr__(
            self, "steps", tuple((float(w), float(s)) for w, s in self.steps)
        )
        object.__setattr__(self, "horizon", float(self.horizon))

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "steps": [list(s) for s in self.steps]}

    @classmethod
    def from_dict(cls, d: dict) -> "AgentCurve":
        return cls(steps=tuple(tuple(s) for s in d["steps"]), horizon=d["horizon"])


@dataclass(frozen=True)
class AlcConfig:
    normalization: str = "linear"
    t0: float = 1.0

    def __post_init__(self):
        if self.normalization not in ("linear", "log"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")

    def to_dict(self) -> dict:
        return {"normalization": self.normalization, "t0": float(self.t0)}


def value_at(curve: TimeCurve, t: float) -> float:
    """Score of the last point with time <= t (0.0 if there is none)."""
    k = bisect.bisect_right(curve.times, t)
    return curve.scores[k - 1] if k else 0.0


def normalized_time(t, horizon: float, cfg: AlcConfig):
    """Map wallclock (scalar or array) onto [0, 1] under ``cfg``."""
    if cfg.normalization == "linear":
        return t / horizon
    return np.log1p(np.divide(t, cfg.t0)) / np.log1p(horizon / cfg.t0)


def alc(curve: AgentCurve, cfg: AlcConfig | None = None) -> float:
    """Area under a step-function agent curve over normalized time.

    Piecewise-exact integration: each step contributes its score times the
    normalized length of the interval until the next step (or the horizon).
    Steps sharing a wallclock collapse to the last one.
    """
    cfg = cfg or AlcConfig()
    T = curve.horizon
    if not T > 0:
        raise InvalidHorizonError(f"horizon must be positive, got {T}")
    steps = curve.steps
    if not steps:
        return 0.0
    total = 0.0
    for k, (w, s) in enumerate(steps):
        w_next = steps[k + 1][0] if k + 1 < len(steps) else T
        w_next = min(w_next, T)
        if w_next <= w:
            continue
        total += s * (normalized_time(w_next, T, cfg) - normalized_time(w, T, cfg))
    return float(total)


@dataclass(frozen=True)
class ScoreReport:
    agents: tuple[str, ...]
    datasets: tuple[str, ...]
    alc: tuple[tuple[float, ...], ...]  # alc[agent][dataset]
    mu: tuple[float, ...]
    sigma: tuple[float, ...]
    ranking: tuple[str, ...]
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n_datasets(self) -> int:
        return len(self.datasets)

    def row(self, agent: str) -> dict[str, float]:
        j = self.agents.index(agent)
        return dict(zip(self.datasets, self.alc[j]))

    def to_dict(self) -> dict:
        out = {
            "agents": list(self.agents),
            "datasets": list(self.datasets),
            "n_datasets": self.n_datasets,
            "alc": [list(r) for r in self.alc],
            "mu": list(self.mu),
            "sigma": list(self.sigma),
            "ranking": list(self.ranking),
        }
        out.update(self.extra)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        known = {"agents", "datasets", "n_datasets", "alc", "mu", "sigma", "ranking"}
        return cls(
            agents=tuple(d["agents"]),
            datasets=tuple(d["datasets"]),
            alc=tuple(tuple(float(v) for v in r) for r in d["alc"]),
            mu=tuple(float(v) for v in d["mu"]),
            sigma=tuple(float(v) for v in d["sigma"]),
            ranking=tuple(d["ranking"]),
            extra={k: v for k, v in d.items() if k not in known},
        )


def aggregate(
    alc_matrix: Sequence[Sequence[float]],
    agents: Sequence[str] | None = None,
    datasets: Sequence[str] | None = None,
) -> ScoreReport:
    """Mean and population standard deviation of ALC per agent, plus ranking.

    ``alc_matrix`` has one row per agent and one column per dataset. The
    ranking sorts by mean descending, ties broken by agent id.
    """
    m = np.asarray(alc_matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise EmptyInputError("ALC matrix must be a non-empty 2-D array")
    n_agents, n_data = m.shape
    agents = tuple(agents) if agents is not None else tuple(f"agent{j}" for j in range(n_agents))
    datasets = tuple(datasets) if datasets is not None else tuple(f"d{i}" for i in range(n_data))
    if len(agents) != n_agents or len(datasets) != n_data:
        raise ValueError("labels do not match matrix shape")
    mu = m.mean(axis=1)
    sigma = m.std(axis=1)
    ranking = tuple(a for _, a in sorted(zip(-mu, agents)))
    return ScoreReport(
        agents=agents,
        datasets=datasets,
        alc=tuple(tuple(float(v) for v in r) for r in m),
        mu=tuple(float(v) for v in mu),
        sigma=tuple(float(v) for v in sigma),
        ranking=ranking,
    )


def worst_of_runs(alc_per_run: Iterable[float]) -> float:
    runs = list(alc_per_run)
    if not runs:
        raise EmptyInputError("need at least one run")
    return min(runs)
