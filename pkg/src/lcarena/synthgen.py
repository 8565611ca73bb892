"""Synthetic meta-datasets built from sigmoid curves with low-rank affinities.

Each of the three sigmoid parameters (asymptote, slope, inflection) gets its
own affinity matrix ``a = b_alg + (U @ V.T) / sqrt(d)``: a per-algorithm
quality term plus a rank-``d`` dataset/algorithm interaction. Affinities are
squashed through the logistic function into fixed ranges.

Randomness uses numpy's Philox4x64 counter-based generator. The latent
factors come from one stream keyed by ``(seed, 0)``; every (dataset, algo)
cell draws its noise from its own stream keyed by ``(seed, 1, i, j)``, so the
output is byte-identical regardless of generation order.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .curves import P_GRID, SizeCurveTriplet, TimeCurve
from .metadata import AlgoMeta, DatasetMeta, MetaDataset, ValidationError, digest

N_TIME_POINTS = 20
TASK_TYPES = ("binary", "multiclass", "regression")
TASK_METRICS = {"binary": "auc", "multiclass": "bac", "regression": "r2"}
FAMILIES = ("KNN", "MLP", "Adaboost", "SGD")
PARAMS = ("L", "k", "x0")


@dataclass(frozen=True)
class SynthConfig:
    n_datasets: int = 200
    n_algorithms: int = 20
    latent_dim: int = 3
    noise_sigma: float = 0.02
    seed: int = 0
    round: str = "R1"
    budget_T: float = 100.0
    cost_scale: float = 10.0

    def __post_init__(self):
        if self.n_datasets < 1 or self.n_algorithms < 1 or self.latent_dim < 1:
            raise ValidationError("counts must be >= 1")
        if not self.noise_sigma >= 0:
            raise ValidationError("noise_sigma must be >= 0")
        if not (self.budget_T > 0 and self.cost_scale > 0):
            raise ValidationError("budget_T and cost_scale must be > 0")
        if self.round not in ("R1", "R2"):
            raise ValidationError(f"unknown round {self.round!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")

    @classmethod
    def round1(cls, **kw) -> "SynthConfig":
        return cls(**{"n_datasets": 200, "n_algorithms": 20, "round": "R1", **kw})

    @classmethod
    def round2(cls, **kw) -> "SynthConfig":
        return cls(**{"n_datasets": 300, "n_algorithms": 40, "round": "R2", **kw})

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LatentModel:
    """Factor matrices per sigmoid parameter, keyed by "L", "k", "x0"."""

    U: dict
    V: dict
    bias: dict

    def affinity(self, h: str) -> np.ndarray:
        d = self.U[h].shape[1]
        return self.bias[h][None, :] + self.U[h] @ self.V[h].T / math.sqrt(d)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def draw_latent(cfg: SynthConfig) -> LatentModel:
    rng = _rng(cfg.seed, 0)
    U, V, bias = {}, {}, {}
    for h in PARAMS:
        U[h] = rng.standard_normal((cfg.n_datasets, cfg.latent_dim))
        V[h] = rng.standard_normal((cfg.n_algorithms, cfg.latent_dim))
        bias[h] = rng.standard_normal(cfg.n_algorithms)
    return LatentModel(U, V, bias)


def sigmoid_params(latent: LatentModel) -> dict[str, np.ndarray]:
    """Squash affinities into asymptote, slope and inflection ranges."""
    return {
        "L": 0.2 + 0.8 * logistic(latent.affinity("L")),
        "k": 1.0 + 9.0 * logistic(latent.affinity("k")),
        "x0": 0.1 + 0.8 * logistic(latent.affinity("x0")),
    }


def clean_curve(x, L, k, x0):
    """Sigmoid rescaled so that the value at x=1 is exactly the asymptote L."""
    x = np.asarray(x, dtype=float)
    return L * logistic(k * (x - x0)) / logistic(k * (1.0 - x0))


def _dataset_meta(cfg: SynthConfig, latent: LatentModel) -> list[DatasetMeta]:
    rng = _rng(cfg.seed, 2)
    out = []
    for i in range(cfg.n_datasets):
        task = TASK_TYPES[i % len(TASK_TYPES)]
        n_train = int(10 ** rng.uniform(2, 5))
        n_features = int(10 ** rng.uniform(1, 4))
        sparse = bool(rng.uniform() < 0.2)
        extra = {f"u_L_{q}": round(float(latent.U["L"][i, q]), 3) for q in range(cfg.latent_dim)}
        out.append(DatasetMeta(
            name=f"d{i:03d}", task_type=task, metric_name=TASK_METRICS[task],
            time_budget_T=float(cfg.budget_T), n_train=n_train, n_features=n_features,
            is_sparse=sparse, extra=extra,
        ))
    return out


def _algorithms(cfg: SynthConfig) -> list[AlgoMeta]:
    hp_of = {
        "KNN": lambda v: {"n_neighbors": 1 + 2 * v},
        "MLP": lambda v: {"hidden_units": 16 * (v + 1)},
        "Adaboost": lambda v: {"n_estimators": 25 * (v + 1)},
        "SGD": lambda v: {"alpha": 10.0 ** -(v + 1)},
    }
    algos = []
    for j in range(cfg.n_algorithms):
        fam = FAMILIES[j % len(FAMILIES)]
        algos.append(AlgoMeta(j, fam, hp_of[fam](j // len(FAMILIES))))
    return algos


def _clip(x):
    return np.clip(x, 0.0, 1.0)


def generate(cfg: SynthConfig) -> MetaDataset:
    latent = draw_latent(cfg)
    prm = sigmoid_params(latent)
    cost_factor = 0.5 + logistic(latent.affinity("k"))
    datasets = _dataset_meta(cfg, latent)
    algorithms = _algorithms(cfg)
    sd = cfg.noise_sigma
    curves_r1, curves_r2 = {}, {}
    m = np.arange(1, N_TIME_POINTS + 1)
    x_time = m / N_TIME_POINTS
    times = cfg.budget_T * m / N_TIME_POINTS
    p = np.array(P_GRID)
    for i, ds in enumerate(datasets):
        for j in range(cfg.n_algorithms):
            rng = _rng(cfg.seed, 1, i, j)
            L, k, x0 = prm["L"][i, j], prm["k"][i, j], prm["x0"][i, j]
            if cfg.round == "R1":
                f = clean_curve(x_time, L, k, x0)
                valid = _clip(f + sd * rng.standard_normal(f.shape))
                test = _clip(f + sd * rng.standard_normal(f.shape))
                curves_r1[(ds.name, j)] = (
                    TimeCurve(times, valid, ds.metric_name),
                    TimeCurve(times, test, ds.metric_name),
                )
            else:
                f = clean_curve(p, L, k, x0)
                valid = _clip(f + sd * rng.standard_normal(f.shape))
                train = _clip(f + 0.2 * (1.0 - p) + sd * rng.standard_normal(f.shape))
                test = _clip(f)
                cost = cfg.cost_scale * cost_factor[i, j] * p ** 1.5
                curves_r2[(ds.name, j)] = SizeCurveTriplet(P_GRID, cost, train, valid, test)
    return MetaDataset(cfg.round, tuple(datasets), tuple(algorithms), curves_r1, curves_r2)


def regenerate_check(cfg: SynthConfig) -> str:
    """Content hash of the meta-dataset ``cfg`` generates."""
    return digest(generate(cfg))


def config_digest(cfg: SynthConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
