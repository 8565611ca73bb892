"""Episode engines for the two protocols.

Round 1 (``Round1Env``): the agent asks to spend ``delta_t`` seconds on one
algorithm, sees the validation points whose time falls within that
algorithm's cumulative budget, and names its own incumbent.

Round 2 (``Round2Env``): the agent queries (algorithm, training fraction)
pairs, pays the pre-computed cost, and sees train/validation scores. The
incumbent is whatever scored best on validation so far.

All time is simulated. Test scores never leave the environment; they are
only read when an agent curve is rebuilt from a finished transcript.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field

from .curves import P_GRID, AgentCurve, grid_index, value_at
from .metadata import MetaDataset


class ProtocolMismatchError(ValueError):
    pass


class InvalidActionError(ValueError):
    pass


class EpisodeFinishedError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActionR1:
    reveal_algo: int
    delta_t: float
    incumbent: int

    def to_dict(self) -> dict:
        return {"reveal_algo": self.reveal_algo, "delta_t": float(self.delta_t),
                "incumbent": self.incumbent}

    @classmethod
    def from_dict(cls, d: dict) -> "ActionR1":
        return cls(int(d["reveal_algo"]), float(d["delta_t"]), int(d["incumbent"]))


@dataclass(frozen=True)
class ObservationR1:
    algo: int | None
    revealed: tuple[tuple[float, float], ...]
    frontier: tuple[float, ...]
    remaining_budget: float
    wallclock: float = 0.0
    done: bool = False

    def to_dict(self) -> dict:
        return {"algo": self.algo, "revealed": [list(p) for p in self.revealed],
                "frontier": list(self.frontier), "remaining_budget": self.remaining_budget,
                "wallclock": self.wallclock, "done": self.done}

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationR1":
        return cls(d["algo"], tuple(tuple(p) for p in d["revealed"]), tuple(d["frontier"]),
                   d["remaining_budget"], d["wallclock"], d["done"])


@dataclass(frozen=True)
class ActionR2:
    algo: int
    p: float

    def to_dict(self) -> dict:
        return {"algo": self.algo, "p": float(self.p)}

    @classmethod
    def from_dict(cls, d: dict) -> "ActionR2":
        return cls(int(d["algo"]), float(d["p"]))


@dataclass(frozen=True)
class ObservationR2:
    """Result of one query; scores are None when the query ran out of budget."""

    algo: int | None
    p: float | None
    cost: float
    r_train: float | None
    r_valid: float | None
    done: bool
    remaining_budget: float
    wallclock: float = 0.0

    def to_dict(self) -> dict:
        return {"algo": self.algo, "p": self.p, "cost": self.cost, "r_train": self.r_train,
                "r_valid": self.r_valid, "done": self.done,
                "remaining_budget": self.remaining_budget, "wallclock": self.wallclock}

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationR2":
        return cls(d["algo"], d["p"], d["cost"], d["r_train"], d["r_valid"], d["done"],
                   d["remaining_budget"], d["wallclock"])


@dataclass
class Record:
    wallclock_after: float
    action: ActionR1 | ActionR2
    observation: ObservationR1 | ObservationR2


@dataclass
class EpisodeTranscript:
    dataset: str
    round: str
    horizon: float
    seed: int = 0
    records: list[Record] = field(default_factory=list)
    agent_curve: AgentCurve | None = None

    @property
    def done(self) -> bool:
        return bool(self.records) and self.records[-1].observation.done


class _Env:
    round = ""

    def __init__(self, md: MetaDataset, dataset_id: str, seed: int = 0):
        if md.round != self.round:
            raise ProtocolMismatchError(
                f"{type(self).__name__} needs a {self.round} meta-dataset, got {md.round}"
            )
        self.md = md
        self.meta = md.dataset(dataset_id)
        self.dataset_id = dataset_id
        self.seed = seed
        self.n_algorithms = md.n_algorithms
        self.T = float(self.meta.time_budget_T)
        self.remaining = self.T
        self.done = False
        self.transcript = EpisodeTranscript(dataset_id, self.round, self.T, seed)

    @property
    def wallclock(self) -> float:
        return self.T - self.remaining

    def _charge(self, cost: float) -> tuple[float, bool]:
        """Deduct ``cost`` (truncated to what is left); returns (charged, truncated)."""
        if cost >= self.remaining:
            charged, self.remaining = self.remaining, 0.0
            self.done = True
            return charged, cost > charged
        self.remaining -= cost
        return cost, False

    def _check_algo(self, a) -> int:
        try:
            idx = operator.index(a)
        except TypeError:
            raise InvalidActionError(f"algorithm index {a!r} is not an integer") from None
        if isinstance(a, bool) or not 0 <= idx < self.n_algorithms:
            raise InvalidActionError(f"algorithm index {a!r} out of range")
        return idx


class Round1Env(_Env):
    round = "R1"

    def __init__(self, md: MetaDataset, dataset_id: str, seed: int = 0):
        super().__init__(md, dataset_id, seed)
        self._valid = [md.r1(dataset_id, a)[0] for a in range(self.n_algorithms)]
        self.reset()

    def reset(self) -> ObservationR1:
        self.remaining = self.T
        self.done = False
        self.frontier = [0.0] * self.n_algorithms
        self.n_revealed = [0] * self.n_algorithms
        self.transcript = EpisodeTranscript(self.dataset_id, self.round, self.T, self.seed)
        return ObservationR1(None, (), tuple(self.frontier), self.remaining, 0.0, False)

    def revealed(self, algo: int) -> list[tuple[float, float]]:
        c = self._valid[algo]
        return list(zip(c.times[: self.n_revealed[algo]], c.scores[: self.n_revealed[algo]]))

    def step(self, action: ActionR1) -> ObservationR1:
        if self.done:
            raise EpisodeFinishedError("episode is finished")
        a = self._check_algo(action.reveal_algo)
        inc = self._check_algo(action.incumbent)
        dt = action.delta_t
        if not (isinstance(dt, (int, float)) and math.isfinite(dt) and dt >= 0):
            raise InvalidActionError(f"delta_t must be a finite non-negative number, got {dt!r}")
        charged, _ = self._charge(float(dt))
        self.frontier[a] += charged
        curve = self._valid[a]
        k0 = k = self.n_revealed[a]
        while k < len(curve) and curve.times[k] <= self.frontier[a]:
            k += 1
        self.n_revealed[a] = k
        new = tuple(zip(curve.times[k0:k], curve.scores[k0:k]))
        obs = ObservationR1(a, new, tuple(self.frontier), self.remaining, self.wallclock, self.done)
        self.transcript.records.append(Record(self.wallclock, ActionR1(a, float(dt), inc), obs))
        return obs


class Round2Env(_Env):
    round = "R2"

    def __init__(self, md: MetaDataset, dataset_id: str, seed: int = 0):
        super().__init__(md, dataset_id, seed)
        self._curves = [md.r2(dataset_id, a) for a in range(self.n_algorithms)]
        self.reset()

    def reset(self) -> ObservationR2:
        self.remaining = self.T
        self.done = False
        self.transcript = EpisodeTranscript(self.dataset_id, self.round, self.T, self.seed)
        return ObservationR2(None, None, 0.0, None, None, False, self.remaining, 0.0)

    def step(self, action: ActionR2) -> ObservationR2:
        if self.done:
            raise EpisodeFinishedError("episode is finished")
        a = self._check_algo(action.algo)
        k = grid_index(action.p) if isinstance(action.p, (int, float)) else -1
        if k < 0:
            raise InvalidActionError(f"p={action.p!r} is not on the 0.1..1.0 grid")
        p = P_GRID[k]
        c = self._curves[a]
        pos = c.anchor(p)
        if pos is None:
            raise InvalidActionError(f"no anchor p={p} for algorithm {a}")
        charged, truncated = self._charge(c.cost[pos])
        if truncated:
            obs = ObservationR2(a, p, charged, None, None, True, self.remaining, self.wallclock)
        else:
            obs = ObservationR2(a, p, charged, c.train[pos], c.valid[pos], self.done,
                                self.remaining, self.wallclock)
        self.transcript.records.append(Record(self.wallclock, ActionR2(a, p), obs))
        return obs


def make_env(md: MetaDataset, dataset_id: str, seed: int = 0):
    if md.round == "R1":
        return Round1Env(md, dataset_id, seed)
    if md.round == "R2":
        return Round2Env(md, dataset_id, seed)
    raise ProtocolMismatchError(f"unknown round {md.round!r}")


def r1_agent_curve(transcript: EpisodeTranscript, md: MetaDataset, use_valid: bool = False) -> AgentCurve:
    """Incumbent score at each recorded wallclock.

    The incumbent's curve is read at its own trained time (its frontier),
    not at the global wallclock. ``use_valid`` switches from test to
    validation curves (development-phase scoring).
    """
    col = 0 if use_valid else 1
    steps = []
    for rec in transcript.records:
        inc = rec.action.incumbent
        tau = rec.observation.frontier[inc]
        steps.append((rec.wallclock_after, value_at(md.r1(transcript.dataset, inc)[col], tau)))
    return AgentCurve(tuple(steps), transcript.horizon)


def r2_agent_curve(transcript: EpisodeTranscript, md: MetaDataset, use_valid: bool = False) -> AgentCurve:
    """Test score of the best-validation (algo, p) seen so far, after each completed query.

    Ties on validation keep the earlier observation.
    """
    steps = []
    best = -math.inf
    value = 0.0
    for rec in transcript.records:
        obs = rec.observation
        if obs.r_valid is None:
            continue
        if obs.r_valid > best:
            best = obs.r_valid
            c = md.r2(transcript.dataset, obs.algo)
            pos = c.anchor(obs.p)
            value = (c.valid if use_valid else c.test)[pos]
        steps.append((rec.wallclock_after, value))
    return AgentCurve(tuple(steps), transcript.horizon)


def agent_curve(transcript: EpisodeTranscript, md: MetaDataset, use_valid: bool = False) -> AgentCurve:
    if transcript.round == "R1":
        return r1_agent_curve(transcript, md, use_valid)
    return r2_agent_curve(transcript, md, use_valid)
