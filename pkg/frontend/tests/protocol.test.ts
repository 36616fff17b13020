import { describe, expect, it } from "vitest";

import { CommandSource, controlRecord, parseRecord } from "../src/protocol.js";

describe("command source", () => {
  it("emits strictly increasing sequence numbers", () => {
    const source = new CommandSource();
    const seqs: number[] = [];
    for (let i = 0; i < 5; i++) {
      const rec = JSON.parse(source.cartesian(0.01 * i, [1e-4, 0, 0]));
      seqs.push(rec.seq);
    }
    const joint = JSON.parse(source.joint(0.06, [0, 0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0]));
    seqs.push(joint.seq);
    for (let i = 1; i < seqs.length; i++) {
      expect(seqs[i]).toBeGreaterThan(seqs[i - 1]);
    }
  });

  it("encodes the documented cartesian payload", () => {
    const source = new CommandSource();
    const rec = JSON.parse(source.cartesian(1.5, [0.01, 0, 0], [1, 0, 0, 0], true, { kind: "grip", force: 50 }));
    expect(rec.type).toBe("command");
    expect(rec.mode).toBe("cartesian");
    expect(rec.delta_pose.translation).toEqual([0.01, 0, 0]);
    expect(rec.clutch).toBe(true);
    expect(rec.effector.kind).toBe("grip");
  });
});

describe("record parsing", () => {
  it("round-trips a frame record", () => {
    const frame = {
      type: "frame",
      seq: 7,
      t: 0.5,
      mode: "cartesian",
      q_f: [0, 0, 0, 0, 0, 0, 0],
      dq_f: [0, 0, 0, 0, 0, 0, 0],
      x_f: { translation: [0.4, 0, 0.5], rotation: [1, 0, 0, 0] },
      f_ext: { force: [0, 0, 0], torque: [0, 0, 0] },
      world: { attached: null, fasteners: {}, cut_progress: 0, deviation: false },
      stage: "coarse",
    };
    const parsed = parseRecord(JSON.stringify(frame));
    expect(parsed).toEqual(frame);
  });

  it("rejects unknown record types and garbage", () => {
    expect(() => parseRecord('{"type":"mystery"}')).toThrow();
    expect(() => parseRecord("not json")).toThrow();
  });

  it("builds control records", () => {
    expect(JSON.parse(controlRecord("start"))).toEqual({ type: "control", action: "start" });
    expect(JSON.parse(controlRecord("switch", { coupling: "twin-joint" }))).toEqual({
      type: "control",
      action: "switch",
      coupling: "twin-joint",
    });
  });
});
