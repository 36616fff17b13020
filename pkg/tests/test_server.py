"""Live gateway: handshake, command path, mode rejection, trial logs."""

import json
import threading
import time

import numpy as np
import pytest
from websockets.sync.client import connect

from telesim.gateway.server import TelesimServer
from telesim.logs import replay_log


@pytest.fixture()
def server(tmp_path):
    srv = TelesimServer(
        host="127.0.0.1",
        port=0,
        scenario="case1-unbolting",
        coupling="haptic-cartesian",
        rate=250.0,
        max_duration=30.0,
        record_dir=str(tmp_path / "logs"),
        pace_to_wall=True,
    )
    ready = threading.Event()

    def runner():
        import asyncio

        asyncio.run(srv.run(ready))

    thread = threading.Thread(target=runner, daemon=True)
    thread.start()
    assert ready.wait(timeout=10.0)
    yield srv
    srv.stop()
    thread.join(timeout=5.0)


def _recv_until(ws, predicate, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        remaining = max(deadline - time.time(), 0.01)
        try:
            rec = json.loads(ws.recv(timeout=remaining))
        except TimeoutError:
            break
        if predicate(rec):
            return rec
    raise AssertionError("expected record not received in time")


def _command(seq, dx, t=0.0):
    return json.dumps(
        {
            "type": "command",
            "seq": seq,
            "t": t,
            "mode": "cartesian",
            "delta_pose": {"translation": [dx, 0.0, 0.0], "rotation": [1.0, 0.0, 0.0, 0.0]},
            "clutch": True,
        }
    )


def test_session_round_trip(server, tmp_path):
    with connect(f"ws://127.0.0.1:{server.port}", max_size=10_000_000) as ws:
        hello = json.loads(ws.recv(timeout=10))
        assert hello["type"] == "hello"
        assert hello["protocol_version"] == 1
        assert hello["mode"] == "cartesian"
        assert hello["model"]["kind"] == "manipulator"
        assert hello["scene"]["task"] == "unbolting"

        ws.send(json.dumps({"type": "control", "action": "start"}))
        ack = _recv_until(ws, lambda r: r.get("type") == "ack" and r.get("action") == "start")
        assert ack["ok"]

        first = _recv_until(ws, lambda r: r.get("type") == "frame")
        x0 = np.array(first["x_f"]["translation"])

        # a 100-step drag of 1e-4 m per command: 0.01 m total
        for k in range(100):
            ws.send(_command(k + 1, 1e-4))
        deadline = time.time() + 8.0
        latest = first
        while time.time() < deadline:
            rec = json.loads(ws.recv(timeout=5))
            if rec.get("type") == "frame":
                latest = rec
                dx = np.array(rec["x_f"]["translation"])[0] - x0[0]
                if abs(dx - 0.01) < 2e-4 and np.linalg.norm(rec["dq_f"]) < 1e-3:
                    break
        dx = np.array(latest["x_f"]["translation"])[0] - x0[0]
        assert abs(dx - 0.01) < 2e-4
        # frames carry the feedback wrench for the gauges
        assert "feedback" in latest

        # joint-mode payload on a cartesian session is rejected visibly
        ws.send(
            json.dumps(
                {
                    "type": "command",
                    "seq": 101,
                    "t": 0.0,
                    "mode": "joint",
                    "q_l": [0.0] * 7,
                    "dq_l": [0.0] * 7,
                }
            )
        )
        err = _recv_until(ws, lambda r: r.get("type") == "error")
        assert err["reason"] == "mode-mismatch"

        # profile switching is refused while the trial runs
        ws.send(json.dumps({"type": "control", "action": "switch", "coupling": "twin-joint"}))
        nack = _recv_until(ws, lambda r: r.get("type") == "ack" and r.get("action") == "switch")
        assert not nack["ok"]

        ws.send(json.dumps({"type": "control", "action": "abort"}))
        end = _recv_until(ws, lambda r: r.get("type") == "event" and r.get("kind") == "trial_end")
        assert end["data"]["reason"] == "aborted"
        log_path = end["data"]["log_path"]
        assert log_path

    log = replay_log(log_path)
    assert log.ended and log.outcome.reason == "aborted"
    # the recorded log settles at the same displacement the frames showed
    xs = [s.x_f_translation[0] for s in log.samples]
    assert abs(xs[-1] - xs[0] - 0.01) < 2e-4


def test_switch_profile_when_idle(server):
    with connect(f"ws://127.0.0.1:{server.port}", max_size=10_000_000) as ws:
        json.loads(ws.recv(timeout=10))  # hello
        ws.send(json.dumps({"type": "control", "action": "switch", "coupling": "twin-joint"}))
        ack = _recv_until(ws, lambda r: r.get("type") == "ack" and r.get("action") == "switch")
        assert ack["ok"]
        hello = _recv_until(ws, lambda r: r.get("type") == "hello")
        assert hello["mode"] == "joint"


def test_command_without_trial_rejected(server):
    with connect(f"ws://127.0.0.1:{server.port}", max_size=10_000_000) as ws:
        json.loads(ws.recv(timeout=10))
        ws.send(_command(1, 1e-4))
        err = _recv_until(ws, lambda r: r.get("type") == "error")
        assert err["reason"] == "no-trial"


def test_malformed_commands_rejected_without_killing_session(server):
    with connect(f"ws://127.0.0.1:{server.port}", max_size=10_000_000) as ws:
        json.loads(ws.recv(timeout=10))
        ws.send(json.dumps({"type": "control", "action": "start"}))
        _recv_until(ws, lambda r: r.get("type") == "ack" and r.get("action") == "start")

        bad_quat = {
            "type": "command", "seq": 1, "t": 0.0, "mode": "cartesian",
            "delta_pose": {"translation": [0, 0, 0], "rotation": [2.0, 0, 0, 0]},
        }
        ws.send(json.dumps(bad_quat))
        err = _recv_until(ws, lambda r: r.get("type") == "error")
        assert err["reason"] == "bad-command"

        ws.send("this is not json")
        err = _recv_until(ws, lambda r: r.get("type") == "error")
        assert err["reason"] == "parse-error"

        # session still alive: a good command flows through
        ws.send(_command(2, 1e-4))
        _recv_until(ws, lambda r: r.get("type") == "frame")
        ws.send(json.dumps({"type": "control", "action": "abort"}))
        _recv_until(ws, lambda r: r.get("type") == "event" and r.get("kind") == "trial_end")
