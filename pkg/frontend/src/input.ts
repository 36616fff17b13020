/**
 * Pointer-to-master mapping: the virtual master device.
 *
 * Screen drags become translation increments in a selectable plane; small
 * rotation widgets emit axis-angle increments. Nothing is emitted while
 * the clutch is released, mirroring the indexing behaviour of a physical
 * master.
 */

import type { Quat, Vec3 } from "./protocol.js";
import { quatFromAxisAngle } from "./fk.js";

export type DragPlane = "XY" | "XZ";

export interface DragDelta {
  translation: Vec3;
  rotation: Quat;
}

export class PointerDragMapper {
  plane: DragPlane;
  sensitivity: number; // meters per pixel
  clutchEngaged = false;

  constructor(plane: DragPlane = "XY", sensitivity = 1e-4) {
    this.plane = plane;
    this.sensitivity = sensitivity;
  }

  /**
   * Map a pointer move of (dxPx, dyPx) screen pixels to a master delta.
   * Screen right is +x; screen up maps to +y (XY plane) or +z (XZ plane).
   * Returns null while the clutch is released.
   */
  drag(dxPx: number, dyPx: number): DragDelta | null {
    if (!this.clutchEngaged) return null;
    const dx = dxPx * this.sensitivity + 0; // + 0 folds -0 into +0
    const up = -dyPx * this.sensitivity + 0;
    const translation: Vec3 = this.plane === "XY" ? [dx, up, 0] : [dx, 0, up];
    return { translation, rotation: [1, 0, 0, 0] };
  }

  /** Rotation widget: an axis-angle increment about a base axis. */
  twist(axis: Vec3, angle: number): DragDelta | null {
    if (!this.clutchEngaged) return null;
    return { translation: [0, 0, 0], rotation: quatFromAxisAngle(axis, angle) };
  }
}
