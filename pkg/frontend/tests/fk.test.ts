import { describe, expect, it } from "vitest";

import { jointPositions, quatFromAxisAngle } from "../src/fk.js";
import type { ModelTree } from "../src/protocol.js";

function twoLinkPlanar(): ModelTree {
  return {
    kind: "manipulator",
    name: "two-link",
    joints: [
      { parent_offset: { translation: [0, 0, 0], rotation_quat: [1, 0, 0, 0] }, axis: [0, 0, 1] },
      { parent_offset: { translation: [0.5, 0, 0], rotation_quat: [1, 0, 0, 0] }, axis: [0, 0, 1] },
    ],
    ee_offset: { translation: [0.5, 0, 0], rotation_quat: [1, 0, 0, 0] },
  };
}

describe("served-parameter forward kinematics", () => {
  it("stretches straight at zero configuration", () => {
    const chain = jointPositions(twoLinkPlanar(), [0, 0]);
    expect(chain.length).toBe(4); // base, two joints, end effector
    expect(chain[3][0]).toBeCloseTo(1.0, 12);
    expect(chain[3][1]).toBeCloseTo(0.0, 12);
  });

  it("folds to +y under a quarter turn of the base joint", () => {
    const chain = jointPositions(twoLinkPlanar(), [Math.PI / 2, 0]);
    expect(chain[3][0]).toBeCloseTo(0.0, 12);
    expect(chain[3][1]).toBeCloseTo(1.0, 12);
  });

  it("honors rotated parent offsets", () => {
    const model = twoLinkPlanar();
    // rotate the second joint frame 90 degrees about x: its z-axis becomes -y,
    // so a positive q2 now lifts the tip out of the plane
    model.joints[1].parent_offset.rotation_quat = Array.from(
      quatFromAxisAngle([1, 0, 0], Math.PI / 2),
    );
    const chain = jointPositions(model, [0, Math.PI / 2]);
    expect(chain[3][0]).toBeCloseTo(0.5, 12);
    expect(chain[3][2]).toBeCloseTo(0.5, 12);
  });
});
