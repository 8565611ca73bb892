"""Meta-dataset object model, JSON directory format and dataset splits.

Directory layout (UTF-8 JSON, LF line endings)::

    <root>/meta.json                          {"round", "n_datasets", "n_algorithms", "format_version"}
    <root>/algorithms.json                    [AlgoMeta, ...]
    <root>/datasets/<name>/meta.json          DatasetMeta
    <root>/datasets/<name>/curves/<id>.json   R1: {"times", "valid", "test"}
                                              R2: {"p", "cost", "train", "valid", "test"}

Scores must already lie in [0, 1]; curves computed with other metric ranges
have to be normalized before they are written.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .curves import P_GRID, SizeCurveTriplet, TimeCurve

FORMAT_VERSION = 1
ROUNDS = ("R1", "R2")


class ValidationError(ValueError):
    """Input violates a documented invariant."""


class IncompletenessError(ValidationError):
    pass


class DataIOError(OSError):
    pass


@dataclass(frozen=True)
class DatasetMeta:
    name: str
    task_type: str
    metric_name: str
    time_budget_T: float
    n_train: int
    n_features: int
    is_sparse: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "task_type": self.task_type,
            "metric_name": self.metric_name,
            "time_budget_T": float(self.time_budget_T),
            "n_train": int(self.n_train),
            "n_features": int(self.n_features),
            "is_sparse": bool(self.is_sparse),
            "extra": {k: float(v) for k, v in self.extra.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetMeta":
        return cls(
            name=str(d["name"]),
            task_type=str(d["task_type"]),
            metric_name=str(d["metric_name"]),
            time_budget_T=float(d["time_budget_T"]),
            n_train=int(d["n_train"]),
            n_features=int(d["n_features"]),
            is_sparse=bool(d.get("is_sparse", False)),
            extra={str(k): float(v) for k, v in d.get("extra", {}).items()},
        )


@dataclass(frozen=True)
class AlgoMeta:
    algo_id: int
    family: str
    hyperparameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"algo_id": self.algo_id, "family": self.family,
                "hyperparameters": dict(self.hyperparameters)}

    @classmethod
    def from_dict(cls, d: dict) -> "AlgoMeta":
        return cls(int(d["algo_id"]), str(d["family"]), dict(d.get("hyperparameters", {})))


@dataclass(frozen=True)
class MetaDataset:
    """Datasets x algorithms collection of learning curves.

    ``curves_r1`` maps (dataset name, algo id) to a (valid, test) pair of
    TimeCurves; ``curves_r2`` maps the same key to a SizeCurveTriplet. Exactly
    one of the two is populated, matching ``round``.
    """

    round: str
    datasets: tuple[DatasetMeta, ...]
    algorithms: tuple[AlgoMeta, ...]
    curves_r1: dict = field(default_factory=dict)
    curves_r2: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    @property
    def dataset_ids(self) -> list[str]:
        return [d.name for d in self.datasets]

    @property
    def n_algorithms(self) -> int:
        return len(self.algorithms)

    def dataset(self, name: str) -> DatasetMeta:
        for d in self.datasets:
            if d.name == name:
                return d
        raise KeyError(name)

    def r1(self, name: str, algo: int) -> tuple[TimeCurve, TimeCurve]:
        return self.curves_r1[(name, algo)]

    def r2(self, name: str, algo: int) -> SizeCurveTriplet:
        return self.curves_r2[(name, algo)]

    def subset(self, names: Sequence[str]) -> "MetaDataset":
        keep = set(names)
        missing = keep - set(self.dataset_ids)
        if missing:
            raise KeyError(f"unknown datasets {sorted(missing)}")
        return replace(
            self,
            datasets=tuple(d for d in self.datasets if d.name in keep),
            curves_r1={k: v for k, v in self.curves_r1.items() if k[0] in keep},
            curves_r2={k: v for k, v in self.curves_r2.items() if k[0] in keep},
        )

    def validate(self) -> None:
        _validate(self)


# ---------------------------------------------------------------------------
# serialization


def _dumps(obj) -> bytes:
    return (json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")


def _curve_payload(md: MetaDataset, name: str, algo: int) -> dict:
    if md.round == "R1":
        valid, test = md.curves_r1[(name, algo)]
        return {"times": list(valid.times), "valid": list(valid.scores), "test": list(test.scores)}
    c = md.curves_r2[(name, algo)]
    return {"p": list(c.p), "cost": list(c.cost), "train": list(c.train),
            "valid": list(c.valid), "test": list(c.test)}


def _dataset_files(md: MetaDataset, ds: DatasetMeta) -> Iterator[tuple[str, bytes]]:
    base = f"datasets/{ds.name}"
    yield f"{base}/meta.json", _dumps(ds.to_dict())
    for a in md.algorithms:
        yield f"{base}/curves/{a.algo_id}.json", _dumps(_curve_payload(md, ds.name, a.algo_id))


def iter_files(md: MetaDataset) -> Iterator[tuple[str, bytes]]:
    """Canonical (relative path, content) pairs, in a fixed order."""
    yield "meta.json", _dumps({
        "round": md.round,
        "n_datasets": len(md.datasets),
        "n_algorithms": len(md.algorithms),
        "format_version": FORMAT_VERSION,
    })
    yield "algorithms.json", _dumps([a.to_dict() for a in md.algorithms])
    for ds in sorted(md.datasets, key=lambda d: d.name):
        yield from _dataset_files(md, ds)


def digest(md: MetaDataset) -> str:
    h = hashlib.sha256()
    for rel, data in iter_files(md):
        h.update(rel.encode() + b"\0" + data + b"\0")
    return h.hexdigest()


def dataset_digest(md: MetaDataset, name: str) -> str:
    """Hash of everything an episode on ``name`` depends on."""
    h = hashlib.sha256()
    h.update(md.round.encode() + b"\0")
    h.update(_dumps([a.to_dict() for a in md.algorithms]))
    for rel, data in _dataset_files(md, md.dataset(name)):
        h.update(rel.encode() + b"\0" + data + b"\0")
    return h.hexdigest()


def save(md: MetaDataset, root_path) -> None:
    root = Path(root_path)
    try:
        for rel, data in iter_files(md):
            target = root / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
    except OSError as exc:
        raise DataIOError(f"cannot write meta-dataset to {root}: {exc}") from exc


def _read_json(path: Path):
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc


def load(root_path) -> MetaDataset:
    """Read and fully validate a meta-dataset directory."""
    root = Path(root_path)
    if not root.is_dir():
        raise DataIOError(f"meta-dataset directory not found: {root}")
    try:
        head = _read_json(root / "meta.json")
        algos_raw = _read_json(root / "algorithms.json")
    except FileNotFoundError as exc:
        raise DataIOError(f"missing top-level file: {exc.filename}") from exc
    rnd = head.get("round")
    if rnd not in ROUNDS:
        raise ValidationError(f"{root / 'meta.json'}: unknown round {rnd!r}")
    if head.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"{root / 'meta.json'}: unsupported format_version")
    try:
        algorithms = tuple(AlgoMeta.from_dict(a) for a in algos_raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{root / 'algorithms.json'}: {exc}") from exc

    ddir = root / "datasets"
    names = sorted(p.name for p in ddir.iterdir() if p.is_dir()) if ddir.is_dir() else []
    datasets = []
    curves_r1, curves_r2 = {}, {}
    for name in names:
        mpath = ddir / name / "meta.json"
        try:
            ds = DatasetMeta.from_dict(_read_json(mpath))
        except FileNotFoundError as exc:
            raise IncompletenessError(f"dataset {name!r} has no meta.json") from exc
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"{mpath}: {exc}") from exc
        if ds.name != name:
            raise ValidationError(f"{mpath}: name {ds.name!r} does not match directory")
        datasets.append(ds)
        for a in algorithms:
            cpath = ddir / name / "curves" / f"{a.algo_id}.json"
            try:
                raw = _read_json(cpath)
            except FileNotFoundError as exc:
                raise IncompletenessError(
                    f"missing curve for (dataset={name!r}, algo={a.algo_id}): {cpath}"
                ) from exc
            key = (name, a.algo_id)
            if rnd == "R1":
                curves_r1[key] = _parse_r1(raw, cpath, ds.metric_name)
            else:
                curves_r2[key] = _parse_r2(raw, cpath)

    md = MetaDataset(rnd, tuple(datasets), algorithms, curves_r1, curves_r2)
    if head.get("n_datasets") != len(datasets) or head.get("n_algorithms") != len(algorithms):
        raise IncompletenessError(
            f"{root / 'meta.json'}: declares {head.get('n_datasets')}x{head.get('n_algorithms')}, "
            f"found {len(datasets)}x{len(algorithms)}"
        )
    _validate(md)
    return md


def _floats(raw: dict, key: str, path: Path) -> list[float]:
    try:
        vals = [float(v) for v in raw[key]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: field {key!r} missing or not numeric") from exc
    for i, v in enumerate(vals):
        if not math.isfinite(v):
            raise ValidationError(f"{path}: {key}[{i}] is not finite")
    return vals


def _parse_r1(raw: dict, path: Path, metric: str) -> tuple[TimeCurve, TimeCurve]:
    times = _floats(raw, "times", path)
    valid = _floats(raw, "valid", path)
    test = _floats(raw, "test", path)
    if not len(times) == len(valid) == len(test):
        raise ValidationError(f"{path}: times/valid/test lengths differ")
    _check_r1(times, valid, test, str(path))
    return TimeCurve(times, valid, metric), TimeCurve(times, test, metric)


def _parse_r2(raw: dict, path: Path) -> SizeCurveTriplet:
    cols = {k: _floats(raw, k, path) for k in ("p", "cost", "train", "valid", "test")}
    n = len(cols["p"])
    if any(len(v) != n for v in cols.values()):
        raise ValidationError(f"{path}: anchor columns differ in length")
    _check_r2(cols, str(path))
    return SizeCurveTriplet(**cols)


def _check_scores(scores: Sequence[float], where: str, label: str) -> None:
    for i, s in enumerate(scores):
        if not 0.0 <= s <= 1.0:
            raise ValidationError(f"{where}: {label}[{i}]={s} outside [0, 1]")


def _check_r1(times, valid, test, where: str) -> None:
    for i, t in enumerate(times):
        if not t > 0:
            raise ValidationError(f"{where}: times[{i}]={t} must be > 0")
        if i and not t > times[i - 1]:
            raise ValidationError(f"{where}: times[{i}]={t} not strictly increasing")
    _check_scores(valid, where, "valid")
    _check_scores(test, where, "test")


def _check_r2(cols: dict, where: str) -> None:
    p = cols["p"]
    for i, q in enumerate(p):
        if q not in P_GRID:
            raise ValidationError(f"{where}: p[{i}]={q} is not on the 0.1..1.0 grid")
        if i and not q > p[i - 1]:
            raise ValidationError(f"{where}: p[{i}]={q} not strictly increasing")
    for i, c in enumerate(cols["cost"]):
        if not c > 0:
            raise ValidationError(f"{where}: cost[{i}]={c} must be > 0")
    for label in ("train", "valid", "test"):
        _check_scores(cols[label], where, label)


def _validate(md: MetaDataset) -> None:
    if md.round not in ROUNDS:
        raise ValidationError(f"unknown round {md.round!r}")
    ids = [a.algo_id for a in md.algorithms]
    if ids != list(range(len(ids))):
        raise ValidationError(f"algorithm ids must be 0..{len(ids) - 1} in order, got {ids}")
    if not ids:
        raise ValidationError("meta-dataset has no algorithms")
    names = [d.name for d in md.datasets]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate dataset names")
    for d in md.datasets:
        if not d.time_budget_T > 0:
            raise ValidationError(f"dataset {d.name}: time_budget_T must be > 0")
        if d.n_train < 1 or d.n_features < 1:
            raise ValidationError(f"dataset {d.name}: n_train and n_features must be >= 1")
    populated, other = (md.curves_r1, md.curves_r2) if md.round == "R1" else (md.curves_r2, md.curves_r1)
    if other:
        raise ValidationError(f"round {md.round} meta-dataset carries curves of the other round")
    for name in names:
        for a in ids:
            key = (name, a)
            if key not in populated:
                raise IncompletenessError(f"missing curve for (dataset={name!r}, algo={a})")
            where = f"curve ({name}, {a})"
            if md.round == "R1":
                valid, test = populated[key]
                if valid.times != test.times:
                    raise ValidationError(f"{where}: valid/test time grids differ")
                _check_r1(valid.times, valid.scores, test.scores, where)
            else:
                c = populated[key]
                _check_r2({"p": c.p, "cost": c.cost, "train": c.train,
                           "valid": c.valid, "test": c.test}, where)
    if len(populated) != len(names) * len(ids):
        raise ValidationError("curve map has keys outside datasets x algorithms")


# ---------------------------------------------------------------------------
# splits


@dataclass(frozen=True)
class SplitPlan:
    """``folds`` holds (train_ids, test_ids) pairs; for a phase split the
    single pair is (development ids, final ids)."""

    kind: str
    folds: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    k: int | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k,
                "folds": [[list(a), list(b)] for a, b in self.folds]}


def _shuffled(ids: Sequence[str], seed: int) -> list[str]:
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(len(ids))
    return [ids[i] for i in order]


def make_kfold(dataset_ids: Sequence[str], k: int = 6, seed: int = 0) -> SplitPlan:
    """Seeded shuffle, then contiguous chunks; a remainder goes one per fold, earliest first."""
    ids = list(dataset_ids)
    n = len(ids)
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of datasets ({n})")
    shuffled = _shuffled(ids, seed)
    folds = []
    start = 0
    for f in range(k):
        size = n // k + (1 if f < n % k else 0)
        test = shuffled[start:start + size]
        start += size
        test_set = set(test)
        train = [d for d in shuffled if d not in test_set]
        folds.append((tuple(train), tuple(test)))
    return SplitPlan("kfold", tuple(folds), k)


def make_phase_split(dataset_ids: Sequence[str], seed: int = 0) -> SplitPlan:
    ids = list(dataset_ids)
    if len(ids) < 2:
        raise ValidationError("a phase split needs at least two datasets")
    shuffled = _shuffled(ids, seed)
    half = (len(ids) + 1) // 2
    return SplitPlan("phase", ((tuple(shuffled[:half]), tuple(shuffled[half:])),))
