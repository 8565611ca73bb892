"""Meta-train / meta-test experiment runner, scoring and replay."""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from . import transcript as tio
from .agents import REGISTRY, make_agent
from .curves import AgentCurve, AlcConfig, ScoreReport, aggregate, alc, worst_of_runs
from .envs import EpisodeTranscript, agent_curve, make_env
from .metadata import (DataIOError, MetaDataset, SplitPlan, ValidationError,
                       dataset_digest, load, make_kfold, make_phase_split)

log = logging.getLogger(__name__)

MAX_STEPS = 10_000


@dataclass(frozen=True)
class AgentSpec:
    id: str
    type: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "type": self.type, "params": dict(self.params)}


@dataclass
class ExperimentConfig:
    meta_dataset: str | None = None
    agents: list[AgentSpec] = field(default_factory=list)
    protocol: str | None = None
    split: dict = field(default_factory=lambda: {"kind": "kfold", "k": 6})
    n_runs: int = 3
    alc: AlcConfig = field(default_factory=AlcConfig)
    seed: int = 0
    output_dir: str | None = None
    jobs: int = 1
    eval_on: str = "test"
    max_steps: int = MAX_STEPS

    def validate(self) -> None:
        if self.n_runs < 1:
            raise ValidationError("n_runs must be >= 1")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")
        if self.eval_on not in ("valid", "test"):
            raise ValidationError("eval_on must be 'valid' or 'test'")
        if self.protocol not in (None, "R1", "R2"):
            raise ValidationError(f"unknown protocol {self.protocol!r}")
        if self.split.get("kind") not in ("kfold", "phase"):
            raise ValidationError(f"unknown split kind {self.split.get('kind')!r}")
        if not self.agents:
            raise ValidationError("no agents configured")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValidationError("agent ids must be unique")
        for a in self.agents:
            if a.type not in REGISTRY:
                raise ValidationError(f"agent {a.id!r}: unregistered type {a.type!r}")

    def to_dict(self) -> dict:
        return {
            "meta_dataset": self.meta_dataset,
            "agents": [a.to_dict() for a in self.agents],
            "protocol": self.protocol,
            "split": dict(self.split),
            "n_runs": self.n_runs,
            "alc": self.alc.to_dict(),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "jobs": self.jobs,
            "eval_on": self.eval_on,
            "max_steps": self.max_steps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown experiment config keys: {sorted(unknown)}")
        kw = dict(d)
        try:
            kw["agents"] = [AgentSpec(a["id"], a["type"], dict(a.get("params", {})))
                            for a in d.get("agents", [])]
            if "alc" in d:
                kw["alc"] = AlcConfig(**d["alc"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad experiment config: {exc}") from exc
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise DataIOError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
        return cls.from_dict(raw)

    def hash(self) -> str:
        """Digest of everything that can change scores (not paths or parallelism)."""
        d = self.to_dict()
        for k in ("meta_dataset", "output_dir", "jobs"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def alc_config_hash(cfg: AlcConfig) -> str:
    return hashlib.sha256(json.dumps(cfg.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# episodes


def run_episode(md: MetaDataset, dataset_id: str, agent, seed: int = 0,
                max_steps: int = MAX_STEPS, use_valid: bool = False) -> EpisodeTranscript:
    """Play one episode to the end of the budget and attach the agent curve."""
    env = make_env(md, dataset_id, seed)
    obs = env.reset()
    agent.start_episode(md.dataset(dataset_id), md.algorithms, md.round)
    for _ in range(max_steps):
        obs = env.step(agent.suggest(obs))
        if obs.done:
            break
    else:
        raise RuntimeError(f"episode on {dataset_id} exceeded {max_steps} steps")
    tr = env.transcript
    tr.agent_curve = agent_curve(tr, md, use_valid=use_valid)
    return tr


@dataclass
class RunResult:
    agent: str
    dataset: str
    run: int
    alc: float
    crashed: bool = False
    transcript: bytes | None = None


_SHARED: dict = {}


def _init_worker(md: MetaDataset) -> None:
    _SHARED["md"] = md


def _fold_task(args) -> list[RunResult]:
    cfg, spec, train_ids, test_ids, keep_transcripts = args
    md = _SHARED["md"]
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise AssertionError(f"fold isolation violated: {sorted(overlap)}")
    out = []
    chash = cfg.hash()
    try:
        agent = make_agent(spec.type, seed=cfg.seed, **spec.params)
        agent.meta_train(md.subset(train_ids))
    except Exception:
        log.exception("agent %s failed during meta-training; scoring its fold as 0", spec.id)
        agent = None
    for ds in test_ids:
        for run in range(cfg.n_runs):
            if agent is None:
                out.append(RunResult(spec.id, ds, run, 0.0, True))
                continue
            try:
                tr = run_episode(md, ds, copy.deepcopy(agent), cfg.seed, cfg.max_steps,
                                 use_valid=cfg.eval_on == "valid")
                score = alc(tr.agent_curve, cfg.alc)
                crashed = False
            except Exception:
                log.exception("agent %s crashed on %s (run %d); scored 0", spec.id, ds, run)
                tr, score, crashed = None, 0.0, True
            blob = None
            if keep_transcripts and tr is not None:
                header = {"agent": spec.id, "agent_type": spec.type, "params": spec.params,
                          "run": run, "data_digest": dataset_digest(md, ds),
                          "alc_config": cfg.alc.to_dict(), "eval_on": cfg.eval_on,
                          "config_hash": chash, "tool_version": __version__}
                blob = tio.dumps(tr, header, {"alc": score})
            out.append(RunResult(spec.id, ds, run, score, crashed, blob))
    return out


def split_plan(cfg: ExperimentConfig, md: MetaDataset) -> SplitPlan:
    ids = md.dataset_ids
    if cfg.split["kind"] == "kfold":
        return make_kfold(ids, int(cfg.split.get("k", 6)), cfg.seed)
    return make_phase_split(ids, cfg.seed)


@dataclass
class ExperimentResult:
    report: ScoreReport
    runs: list[RunResult]
    plan: SplitPlan


def run_experiment(cfg: ExperimentConfig, md: MetaDataset | None = None) -> ExperimentResult:
    """Meta-train each agent per fold, play ``n_runs`` episodes per held-out
    dataset, keep the worst run, aggregate, and write artifacts if
    ``cfg.output_dir`` is set."""
    cfg.validate()
    if md is None:
        if not cfg.meta_dataset:
            raise DataIOError("no meta-dataset given")
        md = load(cfg.meta_dataset)
    if cfg.protocol is not None and cfg.protocol != md.round:
        raise ValidationError(f"config protocol {cfg.protocol} does not match data round {md.round}")
    plan = split_plan(cfg, md)
    keep = cfg.output_dir is not None
    tasks = [(cfg, spec, train, test, keep) for spec in cfg.agents for train, test in plan.folds]
    if cfg.jobs == 1:
        _init_worker(md)
        chunks = [_fold_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(cfg.jobs, initializer=_init_worker, initargs=(md,)) as ex:
            chunks = list(ex.map(_fold_task, tasks))
    runs = sorted((r for c in chunks for r in c), key=lambda r: (r.agent, r.dataset, r.run))
    report = build_report(runs, [a.id for a in cfg.agents],
                          extra={"config_hash": cfg.hash(), "tool_version": __version__,
                                 "protocol": md.round, "split": plan.kind,
                                 "alc_config": cfg.alc.to_dict(), "eval_on": cfg.eval_on})
    result = ExperimentResult(report, runs, plan)
    if keep:
        write_artifacts(result, Path(cfg.output_dir), cfg)
    return result


def build_report(runs: Sequence[RunResult], agents: Sequence[str] | None = None,
                 extra: dict | None = None) -> ScoreReport:
    per: dict[str, dict[str, list[float]]] = {}
    for r in runs:
        per.setdefault(r.agent, {}).setdefault(r.dataset, []).append(r.alc)
    agents = list(agents) if agents is not None else sorted(per)
    datasets = sorted({r.dataset for r in runs})
    for a in agents:
        missing = set(datasets) - set(per.get(a, {}))
        if missing:
            raise ValidationError(f"agent {a} has no runs on {sorted(missing)}")
    matrix = [[worst_of_runs(per[a][d]) for d in datasets] for a in agents]
    rep = aggregate(matrix, agents, datasets)
    rep.extra.update(extra or {})
    rep.extra["runs"] = {a: {d: per[a][d] for d in datasets} for a in agents}
    return rep


# ---------------------------------------------------------------------------
# artifacts


def _stamp(cfg_hash: str) -> str:
    return f"# config_hash={cfg_hash} tool_version={__version__}\n"


def table_csv(report: ScoreReport) -> str:
    """One row per agent, one column per dataset plus ``avg``; rows by average descending."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", *report.datasets, "avg"])
    for a in report.ranking:
        j = report.agents.index(a)
        w.writerow([a, *(repr(v) for v in report.alc[j]), repr(report.mu[j])])
    return buf.getvalue()


def leaderboard_rows(report: ScoreReport) -> list[dict]:
    rows = []
    for rank, a in enumerate(report.ranking, start=1):
        j = report.agents.index(a)
        rows.append({"rank": rank, "agent": a, "mu": report.mu[j], "sigma": report.sigma[j],
                     "per_dataset": dict(zip(report.datasets, report.alc[j]))})
    return rows


def leaderboard_csv(report: ScoreReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "agent", "mu", "sigma"])
    for row in leaderboard_rows(report):
        w.writerow([row["rank"], row["agent"], repr(row["mu"]), repr(row["sigma"])])
    return buf.getvalue()


def write_artifacts(result: ExperimentResult, out: Path, cfg: ExperimentConfig) -> None:
    chash = cfg.hash()
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps(result.report.to_dict(), indent=2) + "\n", encoding="utf-8")
        (out / "per_dataset.csv").write_text(table_csv(result.report) + _stamp(chash),
                                             encoding="utf-8")
        (out / "leaderboard.csv").write_text(leaderboard_csv(result.report) + _stamp(chash),
                                             encoding="utf-8")
        tdir = out / "transcripts"
        tdir.mkdir(exist_ok=True)
        for r in result.runs:
            if r.transcript is not None:
                (tdir / f"{r.agent}__{r.dataset}__run{r.run}.jsonl").write_bytes(r.transcript)
    except OSError as exc:
        raise DataIOError(f"cannot write artifacts to {out}: {exc}") from exc


def score_transcripts(tdir) -> ScoreReport:
    """Rebuild a report from a directory of transcripts (worst run per agent/dataset)."""
    tdir = Path(tdir)
    if not tdir.is_dir():
        raise DataIOError(f"transcript directory not found: {tdir}")
    files = sorted(tdir.glob("*.jsonl"))
    if not files:
        raise ValidationError(f"no transcripts in {tdir}")
    runs, hashes = [], set()
    for f in files:
        head, _, result = tio.read(f)
        runs.append(RunResult(head["agent"], head["dataset"], int(head.get("run", 0)),
                              float(result["alc"])))
        hashes.add(head.get("config_hash"))
    runs.sort(key=lambda r: (r.agent, r.dataset, r.run))
    extra = {"tool_version": __version__,
             "config_hash": hashes.pop() if len(hashes) == 1 else sorted(map(str, hashes))}
    return build_report(runs, extra=extra)


@dataclass
class ReplayResult:
    curve: AgentCurve
    alc: float
    comparable: bool
    stored_alc: float


def replay(transcript_path, md: MetaDataset, alc_cfg: AlcConfig | None = None) -> ReplayResult:
    """Recompute the agent curve and ALC of a stored transcript.

    Raises IntegrityError if the file was altered or was produced from
    different data. With an ALC config other than the stored one the
    recomputed score is returned with ``comparable=False``.
    """
    head, tr, result = tio.read(transcript_path)
    if head.get("round") != md.round:
        raise tio.IntegrityError("transcript round does not match the meta-dataset")
    try:
        digest = dataset_digest(md, tr.dataset)
    except KeyError:
        raise tio.IntegrityError(f"dataset {tr.dataset!r} not in the meta-dataset") from None
    if head.get("data_digest") != digest:
        raise tio.IntegrityError("transcript was produced from different data")
    curve = agent_curve(tr, md, use_valid=head.get("eval_on") == "valid")
    if tr.agent_curve is not None and curve != tr.agent_curve:
        raise tio.IntegrityError("recomputed agent curve differs from the stored one")
    stored_cfg = AlcConfig(**head["alc_config"])
    cfg = alc_cfg or stored_cfg
    score = alc(curve, cfg)
    comparable = alc_config_hash(cfg) == alc_config_hash(stored_cfg)
    stored = float(result["alc"])
    if comparable and score != stored:
        raise tio.IntegrityError(f"replayed ALC {score!r} differs from stored {stored!r}")
    return ReplayResult(curve, score, comparable, stored)
