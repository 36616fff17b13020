/**
 * Console state: latest frame, gauges, stage, trial timer and toasts.
 *
 * Gauge values are the gateway-provided feedback numbers, untouched: the
 * view formats units but never rescales. Malformed inbound records are
 * dropped and counted.
 */

import { parseRecord } from "./protocol.js";
import type { FrameRecord, GatewayRecord, HelloRecord } from "./protocol.js";

export type ConnectionState = "disconnected" | "connecting" | "connected";

export interface Toast {
  kind: "info" | "error";
  text: string;
}

export interface Gauges {
  x: number;
  y: number;
  z: number;
  norm: number;
}

const MAX_TOASTS = 6;

export class ConsoleViewModel {
  connection: ConnectionState = "disconnected";
  mode: "cartesian" | "joint" = "cartesian";
  scenario = "";
  hello: HelloRecord | null = null;
  latestFrame: FrameRecord | null = null;
  stage = "";
  gauges: Gauges = { x: 0, y: 0, z: 0, norm: 0 };
  feedbackTorques: number[] | null = null;
  trialActive = false;
  trialElapsed = 0;
  toasts: Toast[] = [];
  droppedRecords = 0;
  lastOutcome = "";

  private trialStartT: number | null = null;

  /** Feed one raw inbound message; returns the parsed record or null if dropped. */
  ingestText(text: string): GatewayRecord | null {
    let rec: GatewayRecord;
    try {
      rec = parseRecord(text);
    } catch {
      this.droppedRecords += 1;
      return null;
    }
    this.ingest(rec);
    return rec;
  }

  ingest(rec: GatewayRecord): void {
    switch (rec.type) {
      case "hello":
        this.hello = rec;
        this.mode = rec.mode;
        this.scenario = rec.scenario;
        break;
      case "frame":
        this.onFrame(rec);
        break;
      case "ack":
        this.onAck(rec.action, rec.ok, rec.reason);
        break;
      case "error":
        this.pushToast("error", `${rec.reason}: ${rec.detail}`);
        break;
      case "event":
        if (rec.kind === "trial_end") {
          this.trialActive = false;
          this.lastOutcome = String(rec.data.reason ?? "");
          this.pushToast("info", `trial ended: ${this.lastOutcome}`);
        }
        break;
    }
  }

  private onFrame(frame: FrameRecord): void {
    if (!Array.isArray(frame.q_f) || !frame.x_f) {
      this.droppedRecords += 1;
      return;
    }
    this.latestFrame = frame;
    this.stage = frame.stage;
    if (frame.feedback) {
      const [x, y, z] = frame.feedback.force;
      this.gauges = { x, y, z, norm: Math.hypot(x, y, z) };
    }
    if (frame.feedback_torques) {
      this.feedbackTorques = frame.feedback_torques;
    }
    if (this.trialStartT === null) {
      this.trialStartT = frame.t;
    }
    this.trialElapsed = frame.t - this.trialStartT;
  }

  private onAck(action: string, ok: boolean, reason: string): void {
    if (!ok) {
      this.pushToast("error", `${action} rejected: ${reason}`);
      return;
    }
    if (action === "start") {
      this.trialActive = true;
      this.trialStartT = null;
      this.trialElapsed = 0;
      this.lastOutcome = "";
      this.pushToast("info", `trial started (${reason})`);
    } else if (action === "abort") {
      this.pushToast("info", "abort requested");
    } else if (action === "switch") {
      this.pushToast("info", "profile switched");
    }
  }

  pushToast(kind: Toast["kind"], text: string): void {
    this.toasts.push({ kind, text });
    if (this.toasts.length > MAX_TOASTS) {
      this.toasts.shift();
    }
  }
}
