"""JSON-lines episode transcripts.

One JSON object per line::

    {"kind": "header", ...}          dataset, round, seed, agent, horizon, digests
    {"kind": "step", ...}            one per environment step
    {"kind": "result", ...}          stored agent curve and ALC
    {"kind": "checksum", "sha256"}   hash of every preceding byte

Floats are written with ``repr`` so every value reads back bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .curves import AgentCurve
from .envs import (ActionR1, ActionR2, EpisodeTranscript, ObservationR1,
                   ObservationR2, Record)
from .metadata import DataIOError, ValidationError


class IntegrityError(ValidationError):
    pass


def _line(obj) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def dumps(transcript: EpisodeTranscript, header: dict | None = None, result: dict | None = None) -> bytes:
    head = {"kind": "header", "dataset": transcript.dataset, "round": transcript.round,
            "seed": transcript.seed, "horizon": transcript.horizon}
    head.update(header or {})
    body = [_line(head)]
    for rec in transcript.records:
        body.append(_line({"kind": "step", "wallclock": rec.wallclock_after,
                           "action": rec.action.to_dict(),
                           "observation": rec.observation.to_dict()}))
    res = {"kind": "result"}
    if transcript.agent_curve is not None:
        res["agent_curve"] = transcript.agent_curve.to_dict()
    res.update(result or {})
    body.append(_line(res))
    blob = b"".join(body)
    return blob + _line({"kind": "checksum", "sha256": hashlib.sha256(blob).hexdigest()})


def write(path, transcript: EpisodeTranscript, header: dict | None = None, result: dict | None = None) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(dumps(transcript, header, result))
    except OSError as exc:
        raise DataIOError(f"cannot write transcript {path}: {exc}") from exc


def loads(blob: bytes, source: str = "<transcript>") -> tuple[dict, EpisodeTranscript, dict]:
    """Parse and verify a transcript; returns (header, transcript, result)."""
    cut = blob.rstrip(b"\n").rfind(b"\n") + 1
    body, tail = blob[:cut], blob[cut:]
    try:
        check = json.loads(tail)
        expected = check["sha256"]
    except (ValueError, KeyError, TypeError) as exc:
        raise IntegrityError(f"{source}: missing or malformed checksum line") from exc
    if check.get("kind") != "checksum" or hashlib.sha256(body).hexdigest() != expected:
        raise IntegrityError(f"{source}: checksum mismatch")
    try:
        lines = [json.loads(x) for x in body.decode("utf-8").splitlines()]
    except (UnicodeDecodeError, ValueError) as exc:
        raise IntegrityError(f"{source}: unreadable body") from exc
    if len(lines) < 2 or lines[0].get("kind") != "header" or lines[-1].get("kind") != "result":
        raise IntegrityError(f"{source}: malformed transcript structure")
    head, result = lines[0], lines[-1]
    r1 = head["round"] == "R1"
    act_cls, obs_cls = (ActionR1, ObservationR1) if r1 else (ActionR2, ObservationR2)
    tr = EpisodeTranscript(head["dataset"], head["round"], head["horizon"], head["seed"])
    for rec in lines[1:-1]:
        tr.records.append(Record(rec["wallclock"], act_cls.from_dict(rec["action"]),
                                 obs_cls.from_dict(rec["observation"])))
    if "agent_curve" in result:
        tr.agent_curve = AgentCurve.from_dict(result["agent_curve"])
    return head, tr, result


def read(path) -> tuple[dict, EpisodeTranscript, dict]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read transcript {path}: {exc}") from exc
    return loads(blob, str(path))
