"""Acceptance criteria 1-9, one test each; every test records a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py``; the verdict lines are
collected in the "acceptance criteria" section of the terminal summary.
"""
import json
import math
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from lcarena.agents import REGISTRY
from lcarena.curves import P_GRID, AgentCurve, AlcConfig, aggregate, alc
from lcarena.envs import (ActionR1, ActionR2, InvalidActionError, ObservationR1, Round1Env,
                          Round2Env, r1_agent_curve, r2_agent_curve)
from lcarena.harness import AgentSpec, ExperimentConfig, replay, run_experiment
from lcarena.metadata import make_kfold
from lcarena.synthgen import SynthConfig, draw_latent, generate
from lcarena.transcript import read as read_transcript
from test_curves import oracle_resolution, random_curve, riemann_alc
from toys import r1_dataset, r2_dataset, triplet

ROOT = Path(__file__).resolve().parents[1]


# -- 1 ---------------------------------------------------------------------

def test_criterion_1_alc_oracle(verdict):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, worst_free, within_resolution = 0.0, 0.0, True
    for mode in ("linear", "log"):
        cfg = AlcConfig(mode, 1.0)
        for _ in range(200):
            c = random_curve(rng, monotone=True)
            worst = max(worst, abs(alc(c, cfg) - riemann_alc(c, cfg)))
    elapsed = time.perf_counter() - start
    # Curves with large up-and-down jumps: compare against the oracle's own resolution.
    for mode in ("linear", "log"):
        cfg = AlcConfig(mode, 1.0)
        for _ in range(200):
            c = random_curve(rng)
            err = abs(alc(c, cfg) - riemann_alc(c, cfg))
            worst_free = max(worst_free, err)
            within_resolution &= err <= oracle_resolution(c)
    ok = worst < 1e-6 and elapsed < 10.0 and within_resolution
    verdict(1, ok, f"max |closed-form - Riemann| = {worst:.2e} (<1e-6) over 2x200 curves "
                   f"in {elapsed:.1f}s (<10s); non-monotone max {worst_free:.2e} "
                   f"within oracle resolution: {within_resolution}")


# -- 2 ---------------------------------------------------------------------

def test_criterion_2_analytic_episodes(verdict):
    # (a) R1: follow the best algorithm point by point -> its own test ALC.
    md = r1_dataset([([10, 20, 40], [0.4, 0.5, 0.55], [0.35, 0.45, 0.5]),
                     ([10, 30, 60, 100], [0.3, 0.6, 0.7, 0.8], [0.3, 0.62, 0.71, 0.79])])
    env, prev = Round1Env(md, "d0"), 0
    for t in md.r1("d0", 1)[0].times:
        env.step(ActionR1(1, t - prev, 1))
        prev = t
    test = md.r1("d0", 1)[1]
    own = alc(AgentCurve(tuple(zip(test.times, test.scores)), 100.0))
    a = alc(r1_agent_curve(env.transcript, md))
    # (b) R1: incumbent switch at T/2 from a 0.2 algorithm to a 0.8 algorithm.
    b_curve = alc(AgentCurve(((0, 0.2), (50, 0.8)), 100.0))
    md_b = r1_dataset([([10], [0.2], [0.2]), ([40], [0.8], [0.8])])
    env = Round1Env(md_b, "d0")
    env.step(ActionR1(0, 10, 0))
    env.step(ActionR1(1, 40, 1))
    b_env = alc(r1_agent_curve(env.transcript, md_b))
    # (c) R2: one query finishing at wallclock 3 with test 0.6, T=10.
    md_c = r2_dataset([triplet(0.5, 0.6, cost=3.0)], T=10.0)
    env = Round2Env(md_c, "d0")
    env.step(ActionR2(0, 0.1))
    c = alc(r2_agent_curve(env.transcript, md_c))
    checks = {"r1 follow-best": (a, own), "r1 switch at T/2": (b_curve, 0.5),
              "r1 switch in env": (b_env, 0.2 * 0.4 + 0.8 * 0.5), "r2 single query": (c, 0.42)}
    ok = all(abs(got - want) <= 1e-15 for got, want in checks.values())
    verdict(2, ok, "; ".join(f"{k}={got!r} (want {want!r})" for k, (got, want) in checks.items()))


# -- 3 ---------------------------------------------------------------------

def _hidden_values(md, name):
    """Test scores that do not also occur as train/valid values."""
    shown, test = set(), set()
    for j in range(md.n_algorithms):
        if md.round == "R1":
            valid, t = md.r1(name, j)
            shown.update(valid.scores)
            test.update(t.scores)
        else:
            c = md.r2(name, j)
            shown.update(c.valid)
            shown.update(c.train)
            test.update(c.test)
    return test - shown


def _leaks(obs, hidden) -> bool:
    """True if an observation carries a test score or a test-named field.

    Only score-bearing fields are compared; budgets and frontiers are
    bookkeeping and may coincide numerically with a score such as 0.0.
    """
    if any("test" in k for k in obs.to_dict()):
        return True
    if isinstance(obs, ObservationR1):
        scores = {s for _, s in obs.revealed}
    else:
        scores = {obs.r_valid, obs.r_train} - {None}
    return bool(hidden & scores)


def _fuzz_r1(md, name, rng, hidden, bad):
    env = Round1Env(md, name)
    env.reset()
    M, T = md.n_algorithms, env.T
    frontier = [0.0] * M
    shown = [[] for _ in range(M)]
    for _ in range(500):
        a = int(rng.integers(-1, M + 1)) if rng.uniform() < 0.1 else int(rng.integers(M))
        inc = int(rng.integers(M))
        dt = float(rng.choice([-1.0, math.nan])) if rng.uniform() < 0.05 else float(rng.uniform(0, 0.3 * T))
        before = env.remaining
        try:
            obs = env.step(ActionR1(a, dt, inc))
        except InvalidActionError:
            if 0 <= a < M and dt >= 0:
                bad["grid"] += 1
            if env.remaining != before:
                bad["budget"] += 1
            continue
        if not 0 <= a < M or not dt >= 0:
            bad["grid"] += 1
        charged = before - obs.remaining_budget
        if charged < 0 or charged > dt + 1e-12 or obs.remaining_budget < 0:
            bad["budget"] += 1
        if abs(sum(obs.frontier) + obs.remaining_budget - T) > 1e-9 * T:
            bad["budget"] += 1
        if any(f1 < f0 for f0, f1 in zip(frontier, obs.frontier)):
            bad["reveal"] += 1
        frontier = list(obs.frontier)
        for t, s in obs.revealed:
            if t > frontier[a] or (shown[a] and t <= shown[a][-1][0]):
                bad["reveal"] += 1
            shown[a].append((t, s))
        for j in range(M):
            valid = md.r1(name, j)[0]
            expect = [(t, s) for t, s in zip(valid.times, valid.scores) if t <= frontier[j]]
            if shown[j] != expect:
                bad["reveal"] += 1
        if _leaks(obs, hidden):
            bad["hygiene"] += 1
        if obs.done:
            return


def _fuzz_r2(md, name, rng, hidden, bad):
    env = Round2Env(md, name)
    env.reset()
    M, T = md.n_algorithms, env.T
    spent = 0.0
    for _ in range(500):
        a = int(rng.integers(M))
        r = rng.uniform()
        p = float(rng.uniform(-0.5, 1.5)) if r < 0.1 else P_GRID[int(rng.integers(10))]
        before = env.remaining
        try:
            obs = env.step(ActionR2(a, p))
        except InvalidActionError:
            if any(abs(p - g) < 1e-9 for g in P_GRID):
                bad["grid"] += 1
            if env.remaining != before:
                bad["budget"] += 1
            continue
        if obs.p not in P_GRID or abs(obs.p - p) > 1e-9:
            bad["grid"] += 1
        spent += obs.cost
        if obs.remaining_budget < 0 or abs(T - spent - obs.remaining_budget) > 1e-9 * T:
            bad["budget"] += 1
        if _leaks(obs, hidden):
            bad["hygiene"] += 1
        if obs.done:
            break
    # incumbent validation score never decreases, and the curve reads its test score
    best, inc_test, steps = -math.inf, None, []
    for rec in env.transcript.records:
        o = rec.observation
        if o.r_valid is None:
            continue
        if o.r_valid > best:
            best = o.r_valid
            c = md.r2(name, o.algo)
            inc_test = c.test[c.anchor(o.p)]
        steps.append((rec.wallclock_after, inc_test))
    if tuple(steps) != r2_agent_curve(env.transcript, md).steps:
        bad["incumbent"] += 1


def test_criterion_3_protocol_invariants(verdict):
    sets = [generate(SynthConfig(n_datasets=10, n_algorithms=m, round=rnd, seed=s, budget_T=T))
            for rnd in ("R1", "R2") for m, s, T in ((3, 0, 100.0), (8, 1, 30.0))]
    rng = np.random.default_rng(7)
    bad = {"budget": 0, "reveal": 0, "grid": 0, "hygiene": 0, "incumbent": 0}
    hidden = {(id(md), n): _hidden_values(md, n) for md in sets for n in md.dataset_ids}
    n_episodes = 10_000
    for e in range(n_episodes):
        md = sets[e % len(sets)]
        name = md.dataset_ids[int(rng.integers(len(md.dataset_ids)))]
        fuzz = _fuzz_r1 if md.round == "R1" else _fuzz_r2
        fuzz(md, name, rng, hidden[(id(md), name)], bad)
    ok = not any(bad.values())
    verdict(3, ok, f"{n_episodes} fuzzed episodes (R1+R2), violations {bad}")


# -- 4 ---------------------------------------------------------------------

def test_criterion_4_determinism_and_replay(verdict, tmp_path):
    agents = [AgentSpec(k, k) for k in sorted(REGISTRY)]
    problems = []
    n_files = 0
    for rnd in ("R1", "R2"):
        md = generate(SynthConfig(n_datasets=6, n_algorithms=5, round=rnd, seed=11))
        blobs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{rnd}{rep}"
            run_experiment(ExperimentConfig(agents=agents, seed=5, output_dir=str(out)), md)
            blobs.append({f.name: f.read_bytes() for f in (out / "transcripts").iterdir()})
        if blobs[0] != blobs[1]:
            problems.append(f"{rnd}: transcripts differ")
        for f in sorted((tmp_path / f"{rnd}a" / "transcripts").iterdir()):
            r = replay(f, md)
            n_files += 1
            if not (r.comparable and r.alc == r.stored_alc):
                problems.append(f"{f.name}: replay {r.alc!r} != {r.stored_alc!r}")
    verdict(4, not problems, f"{len(agents)} agents x R1/R2, {n_files} transcripts byte-identical "
                             f"across reruns and replayed bit-exactly; problems: {problems[:3]}")


# -- 5 ---------------------------------------------------------------------

def test_criterion_5_structure_recovery(verdict):
    cfg = SynthConfig.round2(noise_sigma=0.0)
    md = generate(cfg)
    aL = draw_latent(cfg).affinity("L")
    hits, rhos = 0, []
    for i, name in enumerate(md.dataset_ids):
        final = np.array([md.r2(name, j).test[-1] for j in range(md.n_algorithms)])
        hits += int(np.argmax(final) == np.argmax(aL[i]))
        rhos.append(spearmanr(aL[i], final).statistic)
    n = len(md.dataset_ids)
    ok = hits == n and min(rhos) >= 0.99
    verdict(5, ok, f"{cfg.n_datasets}x{cfg.n_algorithms} noiseless: argmax match {hits}/{n}, "
                   f"min Spearman {min(rhos):.4f} (>=0.99)")


# -- 6 ---------------------------------------------------------------------

# Mean ALC over seeds 0..19, frozen from the first full run.
FROZEN_MEANS = {"rs": 0.5219248839717712, "bos": 0.741272190916282, "ar": 0.7332901557763778,
                "sched": 0.7610058534511078, "cq": 0.7004846564581323}
C6_AGENTS = [AgentSpec("rs", "random_search"), AgentSpec("bos", "best_on_samples"),
             AgentSpec("ar", "average_rank"), AgentSpec("sched", "ranked_scheduler"),
             AgentSpec("cq", "clustered_q")]


@pytest.mark.slow
def test_criterion_6_baseline_ordering(verdict):
    start = time.perf_counter()
    per_seed = {a.id: [] for a in C6_AGENTS}
    for seed in range(20):
        md = generate(SynthConfig(n_datasets=30, n_algorithms=20, noise_sigma=0.02,
                                  seed=seed, round="R2"))
        rep = run_experiment(ExperimentConfig(agents=C6_AGENTS, seed=seed, jobs=1), md).report
        for a, m in zip(rep.agents, rep.mu):
            per_seed[a].append(m)
    elapsed = time.perf_counter() - start
    means = {a: float(np.mean(v)) for a, v in per_seed.items()}
    margins = {a: means[a] - means["rs"] for a in means if a != "rs"}
    print("criterion 6 means:", json.dumps(means))
    frozen_ok = all(abs(means[a] - FROZEN_MEANS[a]) <= 1e-6 for a in FROZEN_MEANS)
    ok = all(m >= 0.02 for m in margins.values()) and elapsed < 900 and frozen_ok
    verdict(6, ok, "margins over RS " + ", ".join(f"{a}=+{m:.4f}" for a, m in margins.items())
            + f" (>=0.02); RS={means['rs']:.4f}; matches frozen: {frozen_ok}; {elapsed:.0f}s (<900s)")


# -- 7 ---------------------------------------------------------------------

def _naive_mu_sigma(row):
    n = len(row)
    mu = 0.0
    for x in row:
        mu += x
    mu /= n
    var = 0.0
    for x in row:
        var += (x - mu) ** 2
    return mu, math.sqrt(var / n)


def test_criterion_7_aggregation(verdict):
    rng = np.random.default_rng(3)
    worst, broken = 0.0, 0
    for _ in range(1000):
        n_agents, n_ds = int(rng.integers(1, 9)), int(rng.integers(1, 31))
        m = rng.uniform(0, 1, (n_agents, n_ds))
        if rng.uniform() < 0.2:
            m[int(rng.integers(n_agents))] = m[0]  # force ties
        ids = [f"a{int(k)}" for k in rng.permutation(n_agents)]
        rep = aggregate(m.tolist(), ids)
        again = aggregate([list(r) for r in rep.alc], rep.agents, rep.datasets)
        order = tuple(sorted(ids, key=lambda a: (-rep.mu[ids.index(a)], a)))
        broken += int(again != rep or order != rep.ranking)
        for j, row in enumerate(m.tolist()):
            mu, sd = _naive_mu_sigma(row)
            worst = max(worst, abs(mu - rep.mu[j]), abs(sd - rep.sigma[j]))
    ok = broken == 0 and worst <= 1e-12
    verdict(7, ok, f"1000 random matrices: recomputation failures {broken}, "
                   f"max |mu/sigma - naive| = {worst:.1e} (<=1e-12)")


# -- 8 ---------------------------------------------------------------------

def test_criterion_8_harness(verdict, tmp_path):
    problems = []
    md = generate(SynthConfig(n_datasets=12, n_algorithms=5, round="R2", seed=4))
    agents = [AgentSpec("rs", "random_search"), AgentSpec("bos", "best_on_samples"),
              AgentSpec("ft", "freeze_thaw")]
    cfg = ExperimentConfig(agents=agents, n_runs=3, seed=1, output_dir=str(tmp_path / "out"))
    res = run_experiment(cfg, md)
    stored = {}
    for f in (tmp_path / "out" / "transcripts").iterdir():
        head, _, result = read_transcript(f)
        stored.setdefault((head["agent"], head["dataset"]), []).append(result["alc"])
    rep = res.report
    for j, a in enumerate(rep.agents):
        for k, d in enumerate(rep.datasets):
            if len(stored[(a, d)]) != 3 or rep.alc[j][k] != min(stored[(a, d)]):
                problems.append(f"worst-of-3 {a}/{d}")
    for n in (6, 30, 31):
        ids = [f"x{i}" for i in range(n)]
        plan = make_kfold(ids, 6, seed=n)
        tests = [set(te) for _, te in plan.folds]
        sizes = sorted(len(t) for t in tests)
        if sorted(x for t in tests for x in t) != sorted(ids) or sizes[-1] - sizes[0] > 1:
            problems.append(f"partition N={n}")
        if any(set(tr) & set(te) or set(tr) | set(te) != set(ids) for tr, te in plan.folds):
            problems.append(f"train/test overlap N={n}")
        if make_kfold(ids, 6, seed=n) != plan:
            problems.append(f"non-deterministic N={n}")
    serial = run_experiment(ExperimentConfig(agents=agents, seed=1), md).report
    parallel = run_experiment(ExperimentConfig(agents=agents, seed=1, jobs=2), md).report
    if serial != parallel or serial.extra != parallel.extra:
        problems.append("parallel != serial")
    verdict(8, not problems, "worst-of-3 == min(stored runs); k=6 partitions for N=6,30,31; "
                             f"parallel(2) == serial; problems: {problems[:3]}")


# -- 9 ---------------------------------------------------------------------

def test_criterion_9_end_to_end(verdict, tmp_path):
    shutil.copytree(ROOT / "configs", tmp_path / "configs")
    cli = [sys.executable, "-m", "lcarena"]
    start = time.perf_counter()
    steps = [
        cli + ["synthgen", "--config", str(tmp_path / "configs/toy_synth.json"),
               "--out", str(tmp_path / "toy_data")],
        cli + ["run", "--config", str(tmp_path / "configs/toy_experiment.json")],
        cli + ["leaderboard", "--report", str(tmp_path / "toy_results/report.json"),
               "--format", "csv"],
    ]
    codes, last = [], None
    for argv in steps:
        last = subprocess.run(argv, capture_output=True, text=True)
        codes.append(last.returncode)
    elapsed = time.perf_counter() - start
    out = tmp_path / "toy_results"
    exp = json.loads((tmp_path / "configs/toy_experiment.json").read_text())
    n_expected = len(exp["agents"]) * 10 * exp["n_runs"]
    artifacts = all((out / f).is_file() for f in ("report.json", "per_dataset.csv",
                                                   "leaderboard.csv"))
    n_tr = len(list((out / "transcripts").glob("*.jsonl"))) if out.is_dir() else 0
    header_ok = last.stdout.startswith("agent," + ",".join(f"d{i:03d}" for i in range(10)) + ",avg")
    ok = codes == [0, 0, 0] and elapsed < 60 and artifacts and n_tr == n_expected and header_ok
    verdict(9, ok, f"exit codes {codes}, {elapsed:.1f}s (<60s), report/csv artifacts {artifacts}, "
                   f"{n_tr}/{n_expected} transcripts, leaderboard header ok {header_ok}")
