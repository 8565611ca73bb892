"""Simplified freeze-thaw: per-algorithm exponential-saturation fits.

Each algorithm's observed validation curve is fit with

    y(x) = a - b * exp(-c * x),   c >= 0

and the agent resumes ("thaws") the algorithm whose predicted score at its
next budget point, plus an exploration bonus ``beta / sqrt(n + 1)``, is
highest. This stands in for the Bayesian freeze-thaw model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..curves import P_GRID
from .base import Agent

MIN_POINTS = 3


@dataclass(frozen=True)
class FreezeThawFit:
    a: float
    b: float
    c: float
    residual: float
    n_obs: int

    def predict(self, x):
        return self.a - self.b * np.exp(-self.c * np.asarray(x, dtype=float))


C_MAX = 100.0
_C_GRID = np.concatenate([[0.0], np.logspace(-2, np.log10(C_MAX), 61)])


def prior(y) -> FreezeThawFit:
    last = float(y[-1]) if len(y) else 0.0
    return FreezeThawFit(last, 0.0, 0.0, 0.0, len(y))


def _solve_linear(x, y, c):
    """Best (a, b) for rate(s) ``c`` and the residual sum of squares.

    Regresses y on exp(-c x) in closed form; ``c`` may be an array, in which
    case every return value is an array over rates.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    e = np.exp(-c[:, None] * x[None, :])
    ym = y.mean()
    em = e.mean(axis=1)
    de = e - em[:, None]
    dy = y - ym
    var = np.einsum("ij,ij->i", de, de)
    cov = de @ dy
    safe = var > 1e-300
    slope = np.where(safe, cov / np.where(safe, var, 1.0), 0.0)
    a = ym - slope * em
    resid = (a[:, None] + slope[:, None] * e) - y[None, :]
    sse = np.einsum("ij,ij->i", resid, resid)
    return a, -slope, sse


def fit_curve(x, y) -> FreezeThawFit:
    """Least-squares fit of the saturation model.

    For a fixed rate ``c`` the model is linear in (a, b), so the fit is a
    one-dimensional search over ``c`` in [0, C_MAX]: a log-spaced grid,
    then bounded Brent refinement around the best grid point. Fewer than
    three points, or a numerically singular problem, yield the prior.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < MIN_POINTS or np.ptp(x) == 0:
        return prior(y)
    try:
        sse = _solve_linear(x, y, _C_GRID)[2]
        k = int(np.argmin(sse))
        lo = _C_GRID[max(k - 1, 0)]
        hi = _C_GRID[min(k + 1, len(_C_GRID) - 1)]
        c = float(_C_GRID[k])
        if hi > lo:
            opt = minimize_scalar(lambda v: _solve_linear(x, y, v)[2][0], bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            if opt.fun <= sse[k]:
                c = float(opt.x)
        a, b, res = (float(v[0]) for v in _solve_linear(x, y, c))
    except (np.linalg.LinAlgError, FloatingPointError):
        return prior(y)
    if not all(np.isfinite(v) for v in (a, b, c, res)):
        return prior(y)
    return FreezeThawFit(a, b, c, res, len(x))


class FreezeThaw(Agent):
    name = "freeze_thaw"

    def __init__(self, seed: int = 0, beta: float = 0.1, **kw):
        super().__init__(seed, **kw)
        self.beta = beta

    def start_episode(self, dataset, algorithms, round):
        super().start_episode(dataset, algorithms, round)
        self.xs: list[list[float]] = [[] for _ in range(self.M)]
        self.fits = [prior([]) for _ in range(self.M)]

    def observe(self, obs):
        before = [len(h) for h in self.history] if obs is not None else None
        super().observe(obs)
        if obs is None or obs.algo is None:
            return
        a = obs.algo
        if self.round == "R2":
            if obs.r_valid is not None:
                self.xs[a].append(float(obs.p))
        else:
            for t, _ in obs.revealed:
                self.xs[a].append(t / self.T)
        if len(self.history[a]) != before[a]:
            self.fits[a] = fit_curve(self.xs[a], self.history[a])

    def acquisition(self, algo: int, x_next: float) -> float:
        n = len(self.history[algo])
        return float(self.fits[algo].predict(x_next)) + self.beta / np.sqrt(n + 1)

    def act_r2(self):
        open_algos = [j for j in range(self.M) if not self.exhausted(j)]
        if not open_algos:
            return self.r2_action(self.incumbent(0))
        acq = [self.acquisition(j, P_GRID[self.next_idx[j]]) for j in open_algos]
        return self.r2_action(open_algos[int(np.argmax(acq))])

    def act_r1(self):
        dts = [self.portion(self.n_queries[j]) for j in range(self.M)]
        acq = [self.acquisition(j, (self.tau[j] + dts[j]) / self.T) for j in range(self.M)]
        a = int(np.argmax(acq))
        return self.r1_action(a, dts[a])
