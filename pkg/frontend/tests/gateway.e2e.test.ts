/**
 * Console round-trip against a real gateway: a scripted 100 px pointer
 * drag must move the slave 0.01 m (within one command step) in the
 * recorded gateway log, gauges must equal the streamed feedback exactly,
 * and wrong-mode commands must be rejected visibly.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { PointerDragMapper } from "../src/input.js";
import { CommandSource, controlRecord } from "../src/protocol.js";
import type { FrameRecord, GatewayRecord } from "../src/protocol.js";
import { ConsoleViewModel } from "../src/viewmodel.js";

const PORT = 18930 + (process.pid % 40);
const RECORD_DIR = mkdtempSync(join(tmpdir(), "telesim-logs-"));

let gateway: ChildProcess;
let ws: WebSocket;
const vm = new ConsoleViewModel();
const inbox: GatewayRecord[] = [];

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function connectWithRetry(url: string, attempts = 60): Promise<WebSocket> {
  for (let i = 0; i < attempts; i++) {
    try {
      return await new Promise<WebSocket>((resolve, reject) => {
        const socket = new WebSocket(url);
        socket.once("open", () => resolve(socket));
        socket.once("error", reject);
      });
    } catch {
      await sleep(250);
    }
  }
  throw new Error(`gateway at ${url} never came up`);
}

async function awaitRecord(
  predicate: (rec: GatewayRecord) => boolean,
  timeoutMs = 15000,
): Promise<GatewayRecord> {
  const deadline = Date.now() + timeoutMs;
  let cursor = 0;
  while (Date.now() < deadline) {
    while (cursor < inbox.length) {
      const rec = inbox[cursor];
      cursor += 1;
      if (predicate(rec)) return rec;
    }
    await sleep(20);
  }
  throw new Error("expected record never arrived");
}

beforeAll(async () => {
  gateway = spawn(
    "telesim",
    [
      "serve",
      "--port", String(PORT),
      "--scenario", "case1-unbolting",
      "--coupling", "haptic-cartesian",
      "--rate", "250",
      "--record-dir", RECORD_DIR,
    ],
    { stdio: "ignore" },
  );
  ws = await connectWithRetry(`ws://127.0.0.1:${PORT}`);
  ws.on("message", (data) => {
    const rec = vm.ingestText(String(data));
    if (rec) inbox.push(rec);
  });
}, 30000);

afterAll(async () => {
  ws?.close();
  gateway?.kill("SIGTERM");
  await sleep(200);
});

describe("console to gateway round trip", () => {
  it("drives the slave 0.01 m with a 100 px drag and reads it back from the log", async () => {
    await awaitRecord((r) => r.type === "hello", 20000);
    expect(vm.mode).toBe("cartesian");
    expect(vm.hello?.protocol_version).toBe(1);

    ws.send(controlRecord("start"));
    await awaitRecord((r) => r.type === "ack" && r.action === "start" && r.ok);
    expect(vm.trialActive).toBe(true);

    const first = (await awaitRecord((r) => r.type === "frame")) as FrameRecord;
    const x0 = first.x_f.translation[0];

    // the scripted drag: 100 one-pixel pointer moves at 1e-4 m/px
    const mapper = new PointerDragMapper("XY", 1e-4);
    mapper.clutchEngaged = true;
    const source = new CommandSource();
    for (let i = 0; i < 100; i++) {
      const delta = mapper.drag(1, 0);
      expect(delta).not.toBeNull();
      ws.send(source.cartesian(vm.latestFrame?.t ?? 0, delta!.translation, delta!.rotation, true));
      await sleep(2);
    }

    // wait for the arm to settle at the displaced pose
    const deadline = Date.now() + 20000;
    let settled: FrameRecord | null = null;
    while (Date.now() < deadline) {
      const frame = vm.latestFrame;
      if (frame) {
        const dx = frame.x_f.translation[0] - x0;
        const speed = Math.hypot(...frame.dq_f);
        if (Math.abs(dx - 0.01) < 2e-4 && speed < 1e-3) {
          settled = frame;
          break;
        }
      }
      await sleep(50);
    }
    expect(settled, "slave never settled at the commanded displacement").not.toBeNull();

    // the gauge shows exactly what the gateway streamed
    if (settled!.feedback) {
      expect(vm.gauges.x).toBe(settled!.feedback.force[0]);
      expect(vm.gauges.y).toBe(settled!.feedback.force[1]);
      expect(vm.gauges.z).toBe(settled!.feedback.force[2]);
    }

    // a joint-mode payload on this cartesian session is rejected visibly
    ws.send(source.joint(vm.latestFrame?.t ?? 0, [0, 0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0]));
    await awaitRecord((r) => r.type === "error" && r.reason === "mode-mismatch");
    expect(vm.toasts.some((t) => t.kind === "error" && t.text.includes("mode-mismatch"))).toBe(true);

    // switching profiles mid-trial is refused and the UI state holds
    ws.send(controlRecord("switch", { coupling: "twin-joint" }));
    const nack = await awaitRecord((r) => r.type === "ack" && r.action === "switch");
    expect(nack.type === "ack" && nack.ok).toBe(false);
    expect(vm.mode).toBe("cartesian");

    ws.send(controlRecord("abort"));
    const end = await awaitRecord((r) => r.type === "event" && r.kind === "trial_end");
    expect(vm.trialActive).toBe(false);
    const logPath = String((end as { data: Record<string, unknown> }).data.log_path);
    expect(logPath.length).toBeGreaterThan(0);

    // criterion: the displacement is present in the recorded gateway log
    const lines = readFileSync(logPath, "utf-8").trim().split("\n");
    const samples = lines
      .map((line) => JSON.parse(line))
      .filter((rec) => rec.type === "sample");
    expect(samples.length).toBeGreaterThan(10);
    const sx0 = samples[0].x_f_translation[0];
    const sx1 = samples[samples.length - 1].x_f_translation[0];
    expect(Math.abs(sx1 - sx0 - 0.01)).toBeLessThan(2e-4);
  }, 90000);
});
