/**
 * Wire records exchanged with the telesim gateway.
 *
 * Everything is one JSON object per WebSocket message. The console only
 * ever mutates simulation state through `command` and `control` records;
 * unknown inbound record types are surfaced as errors by the caller.
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface PoseTree {
  translation: number[];
  rotation?: number[];
  rotation_quat?: number[];
}

export interface JointTree {
  parent_offset: PoseTree;
  axis: number[];
}

export interface ModelTree {
  kind: string;
  name: string;
  joints: JointTree[];
  ee_offset: PoseTree;
}

export interface SceneTree {
  task: string;
  name: string;
  surfaces: { id: string; origin: number[]; normal: number[]; extents: number[] }[];
  fasteners: { id: string; position: number[] }[];
  objects: { id: string; position: number[] }[];
  targets: { translation: number[] }[];
  container_region: { min: number[]; max: number[] } | null;
  cut: { start: number[]; end: number[]; window: number } | null;
  path_window: number;
}

export interface HelloRecord {
  type: "hello";
  protocol_version: number;
  mode: "cartesian" | "joint";
  scenario: string;
  model: ModelTree;
  scene: SceneTree;
}

export interface FrameRecord {
  type: "frame";
  seq: number;
  t: number;
  mode: string;
  q_f: number[];
  dq_f: number[];
  x_f: { translation: number[]; rotation: number[] };
  f_ext: { force: number[]; torque: number[] };
  feedback?: { force: number[]; torque: number[] };
  feedback_torques?: number[];
  world: {
    attached: string | null;
    fasteners: Record<string, number>;
    cut_progress: number;
    deviation: boolean;
  };
  stage: string;
}

export interface AckRecord {
  type: "ack";
  action: string;
  ok: boolean;
  reason: string;
}

export interface ErrorRecord {
  type: "error";
  reason: string;
  detail: string;
}

export interface EventRecord {
  type: "event";
  t: number;
  kind: string;
  data: Record<string, unknown>;
}

export type GatewayRecord = HelloRecord | FrameRecord | AckRecord | ErrorRecord | EventRecord;

export interface EffectorCommand {
  kind: "grip" | "release" | "spindle" | "suction";
  on?: boolean;
  force?: number;
}

/** Parse one inbound message; throws on garbage so callers can count drops. */
export function parseRecord(text: string): GatewayRecord {
  const rec = JSON.parse(text) as { type?: string };
  switch (rec.type) {
    case "hello":
    case "frame":
    case "ack":
    case "error":
    case "event":
      return rec as GatewayRecord;
    default:
      throw new Error(`unknown record type ${String(rec.type)}`);
  }
}

/** Builds sequence-numbered command records; seq is strictly increasing. */
export class CommandSource {
  private seq = 0;

  get lastSeq(): number {
    return this.seq;
  }

  cartesian(
    t: number,
    delta: Vec3,
    rotation: Quat = [1, 0, 0, 0],
    clutch = true,
    effector?: EffectorCommand,
  ): string {
    this.seq += 1;
    const rec: Record<string, unknown> = {
      type: "command",
      seq: this.seq,
      t,
      mode: "cartesian",
      delta_pose: { translation: delta, rotation },
      clutch,
    };
    if (effector) rec.effector = effector;
    return JSON.stringify(rec);
  }

  joint(t: number, q_l: number[], dq_l: number[], effector?: EffectorCommand): string {
    this.seq += 1;
    const rec: Record<string, unknown> = {
      type: "command",
      seq: this.seq,
      t,
      mode: "joint",
      q_l,
      dq_l,
    };
    if (effector) rec.effector = effector;
    return JSON.stringify(rec);
  }
}

export function controlRecord(action: "start" | "abort" | "switch", extra: Record<string, unknown> = {}): string {
  return JSON.stringify({ type: "control", action, ...extra });
}
