/**
 * Canvas renderer: arm skeleton, task objects, cut-path window band, force
 * gauges and the stage badge. Drawing happens at animation-frame rate with
 * latest-frame-wins semantics; the projection helpers are pure.
 */

import { jointPositions } from "./fk.js";
import type { FrameRecord, HelloRecord, Vec3 } from "./protocol.js";
import type { ConsoleViewModel } from "./viewmodel.js";

export interface View {
  cx: number;
  cy: number;
  scale: number; // pixels per meter
  focus: Vec3; // world point drawn at (cx, cy)
}

/** Dimetric projection of a world point to canvas pixels. */
export function project(p: Vec3, view: View): [number, number] {
  const dx = p[0] - view.focus[0];
  const dy = p[1] - view.focus[1];
  const dz = p[2] - view.focus[2];
  const sx = view.cx + view.scale * (dy * 0.92 + dx * 0.45);
  const sy = view.cy - view.scale * (dz * 0.92 - dx * 0.38);
  return [sx, sy];
}

const STAGE_COLORS: Record<string, string> = {
  coarse: "#5b7fa6",
  fine: "#4d9e58",
  action: "#c99a2e",
  place: "#b05555",
};

export class SceneRenderer {
  private ctx: CanvasRenderingContext2D;
  view: View;
  droppedFrames = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.view = {
      cx: canvas.width / 2,
      cy: canvas.height / 2 + 60,
      scale: 520,
      focus: [0.45, 0, 0.25],
    };
  }

  render(vm: ConsoleViewModel): void {
    const { ctx, canvas } = this;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (vm.hello) {
      try {
        this.drawScene(vm.hello);
        if (vm.latestFrame) this.drawArm(vm.hello, vm.latestFrame);
      } catch {
        this.droppedFrames += 1;
      }
    }
    this.drawGauges(vm);
    this.drawBadges(vm);
  }

  private line(a: Vec3, b: Vec3): void {
    const [ax, ay] = project(a, this.view);
    const [bx, by] = project(b, this.view);
    this.ctx.beginPath();
    this.ctx.moveTo(ax, ay);
    this.ctx.lineTo(bx, by);
    this.ctx.stroke();
  }

  private dot(p: Vec3, r: number): void {
    const [x, y] = project(p, this.view);
    this.ctx.beginPath();
    this.ctx.arc(x, y, r, 0, Math.PI * 2);
    this.ctx.fill();
  }

  private drawScene(hello: HelloRecord): void {
    const { ctx } = this;
    const scene = hello.scene;
    ctx.lineWidth = 1;
    for (const surf of scene.surfaces) {
      const [ox, oy, oz] = surf.origin;
      const [eu, ev] = surf.extents;
      ctx.strokeStyle = surf.id === "sheet" ? "#7a6f4d" : "#3a4a5c";
      // surfaces in the bundled scenes are horizontal patches
      this.polygon([
        [ox - ev, oy - eu, oz],
        [ox + ev, oy - eu, oz],
        [ox + ev, oy + eu, oz],
        [ox - ev, oy + eu, oz],
      ]);
    }
    ctx.fillStyle = "#8fa8c8";
    for (const bolt of scene.fasteners) {
      this.dot([bolt.position[0], bolt.position[1], bolt.position[2]], 3);
    }
    ctx.fillStyle = "#6d8f6d";
    for (const obj of scene.objects) {
      this.dot([obj.position[0], obj.position[1], obj.position[2]], 4);
    }
    if (scene.container_region) {
      ctx.strokeStyle = "#4e6e50";
      const lo = scene.container_region.min;
      const hi = scene.container_region.max;
      this.polygon([
        [lo[0], lo[1], lo[2]],
        [hi[0], lo[1], lo[2]],
        [hi[0], hi[1], lo[2]],
        [lo[0], hi[1], lo[2]],
      ]);
    }
    if (scene.cut) {
      const { start, end, window } = scene.cut;
      const s: Vec3 = [start[0], start[1], start[2]];
      const e: Vec3 = [end[0], end[1], end[2]];
      ctx.strokeStyle = "#caa84c";
      ctx.setLineDash([5, 4]);
      this.line(s, e);
      ctx.setLineDash([]);
      // the +/- window band, drawn transverse to the path in the sheet plane
      ctx.strokeStyle = "#6e5f33";
      for (const side of [-1, 1]) {
        const off = side * window;
        this.line([s[0] + off, s[1], s[2]], [e[0] + off, e[1], e[2]]);
      }
    }
  }

  private polygon(points: Vec3[]): void {
    const { ctx } = this;
    ctx.beginPath();
    points.forEach((p, i) => {
      const [x, y] = project(p, this.view);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.closePath();
    ctx.stroke();
  }

  private drawArm(hello: HelloRecord, frame: FrameRecord): void {
    const { ctx } = this;
    const chain = jointPositions(hello.model, frame.q_f);
    ctx.strokeStyle = "#d8dee7";
    ctx.lineWidth = 3;
    for (let i = 0; i + 1 < chain.length; i++) {
      this.line(chain[i], chain[i + 1]);
    }
    ctx.fillStyle = "#eef2f7";
    for (const p of chain) this.dot(p, 3);
    const tip = chain[chain.length - 1];
    ctx.fillStyle = "#f2c14e";
    this.dot(tip, 5);
    // force vector glyph at the end effector (visual haptics substitute)
    const f = frame.f_ext.force;
    const norm = Math.hypot(f[0], f[1], f[2]);
    if (norm > 0.5) {
      const glyphScale = 0.004; // meters of glyph per newton
      ctx.strokeStyle = "#e06c5a";
      ctx.lineWidth = 2;
      this.line(tip, [tip[0] + f[0] * glyphScale, tip[1] + f[1] * glyphScale, tip[2] + f[2] * glyphScale]);
    }
    // deviation marker when a cutting frame reports an out-of-band excursion
    if (frame.world.deviation) {
      ctx.fillStyle = "#e06c5a";
      ctx.font = "13px system-ui";
      const [x, y] = project(tip, this.view);
      ctx.fillText("OUT OF BAND", x + 10, y - 10);
    }
  }

  private drawGauges(vm: ConsoleViewModel): void {
    const { ctx } = this;
    const x0 = 16;
    let y = 24;
    ctx.font = "12px system-ui";
    const rows: [string, number][] =
      vm.mode === "cartesian"
        ? [
            ["Fx", vm.gauges.x],
            ["Fy", vm.gauges.y],
            ["Fz", vm.gauges.z],
            ["|F|", vm.gauges.norm],
          ]
        : (vm.feedbackTorques ?? []).map((v, i) => [`t${i + 1}`, v] as [string, number]);
    for (const [label, value] of rows) {
      ctx.fillStyle = "#9fb2c8";
      ctx.fillText(`${label} ${value.toFixed(2)} N`, x0, y + 10);
      ctx.fillStyle = "#2a3a4d";
      ctx.fillRect(x0 + 90, y, 120, 10);
      ctx.fillStyle = value >= 0 ? "#4d9e58" : "#b05555";
      const mag = Math.min(Math.abs(value) / 3.3, 1); // master cap as full scale
      ctx.fillRect(x0 + 150, y, Math.sign(value || 1) * 60 * mag, 10);
      y += 18;
    }
  }

  private drawBadges(vm: ConsoleViewModel): void {
    const { ctx, canvas } = this;
    ctx.font = "13px system-ui";
    const stage = vm.stage || "idle";
    ctx.fillStyle = STAGE_COLORS[stage] ?? "#5f6b7a";
    ctx.fillRect(canvas.width - 120, 14, 104, 22);
    ctx.fillStyle = "#0f141b";
    ctx.fillText(stage.toUpperCase(), canvas.width - 108, 30);
    ctx.fillStyle = "#9fb2c8";
    ctx.fillText(`t = ${vm.trialElapsed.toFixed(1)} s`, canvas.width - 120, 54);
    ctx.fillText(vm.connection, canvas.width - 120, 72);
    if (vm.lastOutcome) {
      ctx.fillText(`outcome: ${vm.lastOutcome}`, canvas.width - 180, 90);
    }
  }
}
