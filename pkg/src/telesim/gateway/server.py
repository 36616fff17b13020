"""Live teleoperation gateway over a WebSocket channel.

One control loop per session owns the simulation; the network side only
exchanges the documented line records. Inbound commands are queued to the
loop in seq order; outbound frames are decimated for streaming and dropped
(never queued without bound) when the client cannot keep up.
"""

from __future__ import annotations

import asyncio
import json
import threading
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve

from ..coupling import CouplingConfig
from ..dynamics import ManipulatorModel, manipulator_to_tree, slave_7dof
from ..errors import ConfigurationError, ParseError
from ..logs import record_log
from ..resources import resolve_coupling, resolve_scenario
from ..tasks import TaskSpec, scenario_to_tree
from .loop import run_trial
from .operator import RemoteOperator
from .protocol import (
    PROTOCOL_VERSION,
    ack_record,
    decode_command,
    encode_frame,
    error_record,
    event_record,
    hello_record,
)

STREAM_RATE_HZ = 50.0


class TelesimServer:
    """Gateway host: one trial at a time per connection."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 8765,
        *,
        scenario: str = "case1-unbolting",
        coupling: str = "haptic-cartesian",
        rate: float = 500.0,
        max_duration: float = 600.0,
        record_dir: str | None = None,
        model: ManipulatorModel | None = None,
        pace_to_wall: bool = True,
    ):
        self.host = host
        self.port = port
        self.default_scenario = scenario
        self.default_coupling = coupling
        self.rate = rate
        self.max_duration = max_duration
        self.record_dir = Path(record_dir) if record_dir else None
        self.model = model if model is not None else slave_7dof()
        self.pace_to_wall = pace_to_wall
        self._stop = asyncio.Event()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._trial_count = 0

    async def run(self, ready: threading.Event | None = None) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        async with ws_serve(self._handle, self.host, self.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            if ready is not None:
                ready.set()
            await self._stop.wait()

    def run_forever(self) -> None:
        asyncio.run(self.run())

    def stop(self) -> None:
        if self._loop is not None:
            self._loop.call_soon_threadsafe(self._stop.set)

    # --- session ----------------------------------------------------------------

    async def _handle(self, ws) -> None:
        session = _Session(self, ws)
        await session.send_hello()
        try:
            async for message in ws:
                data = message.encode() if isinstance(message, str) else message
                await session.handle(data)
        finally:
            session.close()


class _Session:
    def __init__(self, server: TelesimServer, ws):
        self.server = server
        self.ws = ws
        self.scenario: TaskSpec = resolve_scenario(server.default_scenario)
        self.coupling: CouplingConfig = resolve_coupling(server.default_coupling)
        self.operator: RemoteOperator | None = None
        self.thread: threading.Thread | None = None
        self.frames: asyncio.Queue = asyncio.Queue(maxsize=8)
        self.frames_dropped = 0
        self.streamer: asyncio.Task | None = None

    @property
    def running(self) -> bool:
        return self.thread is not None and self.thread.is_alive()

    async def send_hello(self) -> None:
        await self.ws.send(
            hello_record(
                self.coupling.mode,
                self.scenario.name,
                manipulator_to_tree(self.server.model),
                scenario_to_tree(self.scenario),
            ).decode()
        )

    async def handle(self, data: bytes) -> None:
        try:
            rec = json.loads(data.decode())
        except json.JSONDecodeError as exc:
            await self.ws.send(error_record("parse-error", exc.msg).decode())
            return
        kind = rec.get("type")
        if kind == "command":
            await self._on_command(data)
        elif kind == "control":
            await self._on_control(rec)
        else:
            await self.ws.send(error_record("unknown-record", str(kind)).decode())

    async def _on_command(self, data: bytes) -> None:
        if self.operator is None or not self.running:
            await self.ws.send(error_record("no-trial", "start a trial first").decode())
            return
        try:
            cmd = decode_command(data, expected_mode=self.coupling.mode)
        except ConfigurationError as exc:
            await self.ws.send(error_record("mode-mismatch", str(exc)).decode())
            return
        except ParseError as exc:
            await self.ws.send(error_record("parse-error", str(exc)).decode())
            return
        except ValueError as exc:  # non-unit rotations, malformed numerics
            await self.ws.send(error_record("bad-command", str(exc)).decode())
            return
        n = self.server.model.n
        if cmd.q_l is not None and len(cmd.q_l) != n:
            await self.ws.send(error_record("bad-command", f"expected {n} joints").decode())
            return
        self.operator.push(cmd)

    async def _on_control(self, rec: dict) -> None:
        action = rec.get("action")
        if action == "start":
            await self._start(rec)
        elif action == "abort":
            if self.running:
                self.operator.close()
                await self.ws.send(ack_record("abort", True).decode())
            else:
                await self.ws.send(ack_record("abort", False, "no trial running").decode())
        elif action == "switch":
            if self.running:
                await self.ws.send(ack_record("switch", False, "trial running").decode())
                return
            try:
                self.coupling = resolve_coupling(rec.get("coupling", self.server.default_coupling))
                if "scenario" in rec:
                    self.scenario = resolve_scenario(rec["scenario"])
            except FileNotFoundError as exc:
                await self.ws.send(ack_record("switch", False, str(exc)).decode())
                return
            await self.ws.send(ack_record("switch", True).decode())
            await self.send_hello()
        else:
            await self.ws.send(ack_record(str(action), False, "unknown action").decode())

    async def _start(self, rec: dict) -> None:
        if self.running:
            await self.ws.send(ack_record("start", False, "trial already running").decode())
            return
        try:
            if "scenario" in rec:
                self.scenario = resolve_scenario(rec["scenario"])
            if "coupling" in rec:
                self.coupling = resolve_coupling(rec["coupling"])
        except FileNotFoundError as exc:
            await self.ws.send(ack_record("start", False, str(exc)).decode())
            return
        self.server._trial_count += 1
        trial_id = f"session-{self.server._trial_count}"
        self.operator = RemoteOperator(self.coupling.mode)
        self.frames = asyncio.Queue(maxsize=8)
        loop = asyncio.get_running_loop()
        stream_decim = max(int(round(self.server.rate / STREAM_RATE_HZ)), 1)

        def frame_sink(frame):
            if frame.seq % stream_decim != 0:
                return
            data = encode_frame(frame)
            loop.call_soon_threadsafe(self._offer_frame, data)

        def worker():
            log = run_trial(
                self.scenario,
                self.coupling,
                self.operator,
                rate=self.server.rate,
                max_duration=self.server.max_duration,
                model=self.server.model,
                trial_id=trial_id,
                frame_sink=frame_sink,
                pace_to_wall=self.server.pace_to_wall,
            )
            log_path = ""
            if self.server.record_dir is not None:
                self.server.record_dir.mkdir(parents=True, exist_ok=True)
                path = self.server.record_dir / f"{trial_id}.jsonl"
                record_log(log, path)
                log_path = str(path)
            loop.call_soon_threadsafe(self._finish, log, log_path)

        self.thread = threading.Thread(target=worker, daemon=True)
        self.thread.start()
        if self.streamer is None or self.streamer.done():
            self.streamer = asyncio.ensure_future(self._stream())
        await self.ws.send(ack_record("start", True, trial_id).decode())

    def _offer_frame(self, data: bytes) -> None:
        if self.frames.full():
            self.frames_dropped += 1  # latest-wins backpressure
            try:
                self.frames.get_nowait()
            except asyncio.QueueEmpty:
                pass
        self.frames.put_nowait(data)

    def _finish(self, log, log_path: str) -> None:
        record = event_record(
            log.t_end,
            "trial_end",
            success=log.outcome.success,
            reason=log.outcome.reason,
            time_s=log.outcome.time_s,
            trial_id=log.trial_id,
            log_path=log_path,
            frames_dropped=self.frames_dropped,
        )
        asyncio.ensure_future(self._send_safe(record))

    async def _send_safe(self, data: bytes) -> None:
        try:
            await self.ws.send(data.decode())
        except Exception:
            pass

    async def _stream(self) -> None:
        while True:
            data = await self.frames.get()
            try:
                await self.ws.send(data.decode())
            except Exception:
                return

    def close(self) -> None:
        if self.operator is not None:
            self.operator.close()
        if self.streamer is not None:
            self.streamer.cancel()
