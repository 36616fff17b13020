"""Wire records exchanged between the gateway and operator clients.

Everything on the wire is one JSON object per line (UTF-8, LF-terminated,
sorted keys), so the protocol is endian-free and diffable. Unknown fields
are ignored for forward compatibility; missing required fields reject the
record. A session opens with a hello record declaring the protocol version
and coupling mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..coupling import CARTESIAN, JOINT
from ..errors import ConfigurationError, ParseError
from ..geometry import SpatialPose, Wrench

PROTOCOL_VERSION = 1

GRIP = "grip"
RELEASE = "release"
SPINDLE = "spindle"
SUCTION = "suction"

_EFFECTOR_KINDS = (GRIP, RELEASE, SPINDLE, SUCTION)


@dataclass(eq=False)
class EffectorCommand:
    kind: str
    on: bool = True
    force: float = 0.0  # grip force, N

    def __post_init__(self):
        if self.kind not in _EFFECTOR_KINDS:
            raise ConfigurationError(f"unknown effector command {self.kind!r}")


@dataclass(eq=False)
class MasterCommand:
    seq: int
    t: float
    mode: str  # cartesian | joint
    delta_pose: SpatialPose | None = None  # cartesian payload
    clutch: bool = True
    q_l: np.ndarray | None = None  # joint payload
    dq_l: np.ndarray | None = None
    effector: EffectorCommand | None = None

    def __post_init__(self):
        if self.mode == CARTESIAN:
            if self.delta_pose is None:
                raise ConfigurationError("cartesian command needs delta_pose")
            if self.q_l is not None or self.dq_l is not None:
                raise ConfigurationError("cartesian command must not carry joint payload")
        elif self.mode == JOINT:
            if self.q_l is None or self.dq_l is None:
                raise ConfigurationError("joint command needs q_l and dq_l")
            if self.delta_pose is not None:
                raise ConfigurationError("joint command must not carry delta_pose")
            self.q_l = np.asarray(self.q_l, dtype=float).reshape(-1)
            self.dq_l = np.asarray(self.dq_l, dtype=float).reshape(-1)
        else:
            raise ConfigurationError(f"unknown command mode {self.mode!r}")


@dataclass(eq=False)
class SlaveFrame:
    seq: int
    t: float
    mode: str
    q_f: np.ndarray
    dq_f: np.ndarray
    x_f: SpatialPose
    f_ext: Wrench
    feedback_force: Wrench | None = None  # cartesian mode: F_l at the master
    feedback_torques: np.ndarray | None = None  # joint mode: tau_l
    world: dict = field(default_factory=dict)
    stage: str = ""


def _vec(v) -> list[float]:
    return [float(x) for x in np.asarray(v).reshape(-1)]


def _json_line(obj: dict) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode()


def encode_frame(frame: SlaveFrame) -> bytes:
    rec = {
        "type": "frame",
        "seq": int(frame.seq),
        "t": float(frame.t),
        "mode": frame.mode,
        "q_f": _vec(frame.q_f),
        "dq_f": _vec(frame.dq_f),
        "x_f": {"translation": _vec(frame.x_f.translation), "rotation": _vec(frame.x_f.rotation)},
        "f_ext": {"force": _vec(frame.f_ext.force), "torque": _vec(frame.f_ext.torque)},
        "world": frame.world,
        "stage": frame.stage,
    }
    if frame.feedback_force is not None:
        rec["feedback"] = {"force": _vec(frame.feedback_force.force), "torque": _vec(frame.feedback_force.torque)}
    if frame.feedback_torques is not None:
        rec["feedback_torques"] = _vec(frame.feedback_torques)
    return _json_line(rec)


def _parse_line(data: bytes) -> dict:
    text = data.decode(errors="replace").strip()
    if not text:
        raise ParseError("empty record")
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed record: {exc.msg}", offset=exc.pos) from None
    if not isinstance(rec, dict):
        raise ParseError("record is not a JSON object")
    return rec


def _require(rec: dict, key: str):
    if key not in rec:
        raise ParseError(f"record is missing required field {key!r}")
    return rec[key]


def decode_frame(data: bytes) -> SlaveFrame:
    rec = _parse_line(data)
    if rec.get("type") != "frame":
        raise ParseError(f"expected a frame record, got {rec.get('type')!r}")
    pose = _require(rec, "x_f")
    wrench = _require(rec, "f_ext")
    feedback_force = None
    if "feedback" in rec:
        feedback_force = Wrench(force=rec["feedback"]["force"], torque=rec["feedback"]["torque"])
    feedback_torques = np.asarray(rec["feedback_torques"], dtype=float) if "feedback_torques" in rec else None
    return SlaveFrame(
        seq=int(_require(rec, "seq")),
        t=float(_require(rec, "t")),
        mode=_require(rec, "mode"),
        q_f=np.asarray(_require(rec, "q_f"), dtype=float),
        dq_f=np.asarray(_require(rec, "dq_f"), dtype=float),
        x_f=SpatialPose.from_parts(pose["translation"], pose["rotation"]),
        f_ext=Wrench(force=wrench["force"], torque=wrench["torque"]),
        feedback_force=feedback_force,
        feedback_torques=feedback_torques,
        world=rec.get("world", {}),
        stage=rec.get("stage", ""),
    )


def encode_command(cmd: MasterCommand) -> bytes:
    rec: dict = {"type": "command", "seq": int(cmd.seq), "t": float(cmd.t), "mode": cmd.mode}
    if cmd.mode == CARTESIAN:
        rec["delta_pose"] = {
            "translation": _vec(cmd.delta_pose.translation),
            "rotation": _vec(cmd.delta_pose.rotation),
        }
        rec["clutch"] = bool(cmd.clutch)
    else:
        rec["q_l"] = _vec(cmd.q_l)
        rec["dq_l"] = _vec(cmd.dq_l)
    if cmd.effector is not None:
        rec["effector"] = {
            "kind": cmd.effector.kind,
            "on": bool(cmd.effector.on),
            "force": float(cmd.effector.force),
        }
    return _json_line(rec)


def decode_command(data: bytes, expected_mode: str | None = None) -> MasterCommand:
    """Parse one command record; rejects payloads of the wrong coupling mode."""
    rec = _parse_line(data)
    if rec.get("type") != "command":
        raise ParseError(f"expected a command record, got {rec.get('type')!r}")
    mode = _require(rec, "mode")
    if expected_mode is not None and mode != expected_mode:
        raise ConfigurationError(f"mode mismatch: session is {expected_mode}, command is {mode}")
    effector = None
    if rec.get("effector") is not None:
        e = rec["effector"]
        effector = EffectorCommand(
            kind=_require(e, "kind"), on=bool(e.get("on", True)), force=float(e.get("force", 0.0))
        )
    if mode == CARTESIAN:
        pose = _require(rec, "delta_pose")
        delta = SpatialPose.from_parts(pose["translation"], pose.get("rotation"))
        return MasterCommand(
            seq=int(_require(rec, "seq")),
            t=float(_require(rec, "t")),
            mode=mode,
            delta_pose=delta,
            clutch=bool(rec.get("clutch", True)),
            effector=effector,
        )
    if mode == JOINT:
        return MasterCommand(
            seq=int(_require(rec, "seq")),
            t=float(_require(rec, "t")),
            mode=mode,
            q_l=np.asarray(_require(rec, "q_l"), dtype=float),
            dq_l=np.asarray(_require(rec, "dq_l"), dtype=float),
            effector=effector,
        )
    raise ParseError(f"unknown command mode {mode!r}")


def hello_record(mode: str, scenario: str, model_tree: dict, scene_tree: dict) -> bytes:
    return _json_line(
        {
            "type": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "mode": mode,
            "scenario": scenario,
            "model": model_tree,
            "scene": scene_tree,
        }
    )


def control_record(action: str, **extra) -> bytes:
    return _json_line({"type": "control", "action": action, **extra})


def ack_record(action: str, ok: bool, reason: str = "") -> bytes:
    return _json_line({"type": "ack", "action": action, "ok": ok, "reason": reason})


def error_record(reason: str, detail: str = "") -> bytes:
    return _json_line({"type": "error", "reason": reason, "detail": detail})


def event_record(t: float, kind: str, **data) -> bytes:
    return _json_line({"type": "event", "t": float(t), "kind": kind, "data": data})
