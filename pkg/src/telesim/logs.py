"""Trial logs: in-memory structures and newline-delimited record files.

A log file is one JSON object per line: a header record, then samples and
events in time order, then an outcome record. Records are serialized
canonically (sorted keys, no whitespace) so identical trials produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ContractViolationError, ParseError, UnsupportedVersionError
from .tasks.world import Outcome

LOG_FORMAT_VERSION = 1

HAPTIC = "haptic"
TWIN = "twin"


@dataclass(frozen=True)
class LogSample:
    """One decimated control-loop sample. Plain tuples keep equality exact."""

    t: float
    q_f: tuple
    dq_f: tuple
    x_f_translation: tuple
    x_f_rotation: tuple  # quaternion w, x, y, z
    f_ext_force: tuple
    f_ext_torque: tuple
    effector: str  # "idle" | "spindle" | "holding" | ...
    stage: str = ""


@dataclass(frozen=True)
class LogEvent:
    t: float
    kind: str
    data: tuple = ()  # (key, value) pairs, kept sorted for canonical encoding


def make_event(t: float, kind: str, **data) -> LogEvent:
    return LogEvent(t=float(t), kind=kind, data=tuple(sorted(data.items())))


@dataclass
class TrialLog:
    trial_id: str
    platform: str  # "haptic" | "twin"
    task: str
    scenario: str = ""
    coupling_profile: str = ""
    rate_hz: float = 1000.0
    sample_rate_hz: float = 100.0
    seed: int | None = None
    samples: list[LogSample] = field(default_factory=list)
    events: list[LogEvent] = field(default_factory=list)
    outcome: Outcome | None = None
    counters: dict = field(default_factory=dict)
    ended: bool = False

    @property
    def t_start(self) -> float:
        return self.samples[0].t if self.samples else 0.0

    @property
    def t_end(self) -> float:
        return self.samples[-1].t if self.samples else 0.0

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def events_of(self, *kinds: str) -> list[LogEvent]:
        return [e for e in self.events if e.kind in kinds]

    def validate(self) -> None:
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ContractViolationError("sample timestamps must be strictly increasing")
        if self.samples:
            lo, hi = self.t_start, self.t_end
            for e in self.events:
                if not lo - 1e-9 <= e.t <= hi + 1e-9:
                    raise ContractViolationError(f"event at t={e.t} outside [{lo}, {hi}]")
        if self.ended and self.outcome is None:
            raise ContractViolationError("an ended trial must carry an outcome")
        if not self.ended and self.outcome is not None:
            raise ContractViolationError("outcome present before the trial ended")


# --- serialization ------------------------------------------------------------

def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _header_record(log: TrialLog) -> dict:
    return {
        "type": "header",
        "format_version": LOG_FORMAT_VERSION,
        "trial_id": log.trial_id,
        "platform": log.platform,
        "task": log.task,
        "scenario": log.scenario,
        "coupling_profile": log.coupling_profile,
        "rate_hz": log.rate_hz,
        "sample_rate_hz": log.sample_rate_hz,
        "seed": log.seed,
    }


def _sample_record(s: LogSample) -> dict:
    return {"type": "sample", **asdict(s)}


def _event_record(e: LogEvent) -> dict:
    return {"type": "event", "t": e.t, "kind": e.kind, "data": list(map(list, e.data))}


def _outcome_record(log: TrialLog) -> dict:
    return {
        "type": "outcome",
        "success": log.outcome.success,
        "reason": log.outcome.reason,
        "time_s": log.outcome.time_s,
        "counters": dict(sorted(log.counters.items())),
    }


def encode_log(log: TrialLog) -> bytes:
    """Canonical byte encoding of a complete trial log."""
    lines = [_dumps(_header_record(log))]
    merged = [(s.t, 0, s) for s in log.samples] + [(e.t, 1, e) for e in log.events]
    merged.sort(key=lambda item: (item[0], item[1]))
    for _, tag, item in merged:
        lines.append(_dumps(_sample_record(item) if tag == 0 else _event_record(item)))
    if log.outcome is not None:
        lines.append(_dumps(_outcome_record(log)))
    return ("\n".join(lines) + "\n").encode()


def decode_log(data: bytes) -> TrialLog:
    offset = 0
    log: TrialLog | None = None
    for raw in data.split(b"\n"):
        line = raw.decode(errors="replace").strip()
        if not line:
            offset += len(raw) + 1
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad log record: {exc.msg}", offset=offset + exc.pos) from None
        if not isinstance(rec, dict) or "type" not in rec:
            raise ParseError("log record is not an object with a 'type'", offset=offset)
        kind = rec["type"]
        if kind == "header":
            version = rec.get("format_version")
            if version != LOG_FORMAT_VERSION:
                raise UnsupportedVersionError(f"log format_version {version!r} not supported")
            log = TrialLog(
                trial_id=rec["trial_id"],
                platform=rec["platform"],
                task=rec["task"],
                scenario=rec.get("scenario", ""),
                coupling_profile=rec.get("coupling_profile", ""),
                rate_hz=rec.get("rate_hz", 1000.0),
                sample_rate_hz=rec.get("sample_rate_hz", 100.0),
                seed=rec.get("seed"),
            )
        elif log is None:
            raise ParseError("log record precedes the header", offset=offset)
        elif kind == "sample":
            rec.pop("type")
            log.samples.append(
                LogSample(
                    t=rec["t"],
                    q_f=tuple(rec["q_f"]),
                    dq_f=tuple(rec["dq_f"]),
                    x_f_translation=tuple(rec["x_f_translation"]),
                    x_f_rotation=tuple(rec["x_f_rotation"]),
                    f_ext_force=tuple(rec["f_ext_force"]),
                    f_ext_torque=tuple(rec["f_ext_torque"]),
                    effector=rec["effector"],
                    stage=rec.get("stage", ""),
                )
            )
        elif kind == "event":
            log.events.append(
                LogEvent(t=rec["t"], kind=rec["kind"], data=tuple((k, v) for k, v in rec["data"]))
            )
        elif kind == "outcome":
            log.outcome = Outcome(success=rec["success"], reason=rec["reason"], time_s=rec["time_s"])
            log.counters = rec.get("counters", {})
            log.ended = True
        else:
            raise ParseError(f"unknown log record type {kind!r}", offset=offset)
        offset += len(raw) + 1
    if log is None:
        raise ParseError("log contains no header record")
    return log


def record_log(log: TrialLog, path) -> None:
    """Persist a trial log; lossless at the log's decimation rate."""
    Path(path).write_bytes(encode_log(log))


def replay_log(path) -> TrialLog:
    """Load a recorded trial; equal to the recorded value."""
    return decode_log(Path(path).read_bytes())
