/**
 * Console wiring: WebSocket session, pointer steering, trial controls.
 *
 * Configuration comes from URL query parameters: host, port, sensitivity,
 * plane (XY or XZ). Hold Space (or the on-screen button) as the clutch
 * while dragging; in joint mode, per-joint sliders generate the master
 * trajectory instead.
 */

import { PointerDragMapper, type DragPlane } from "./input.js";
import { CommandSource, controlRecord } from "./protocol.js";
import { SceneRenderer } from "./render.js";
import { ConsoleViewModel } from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
const port = params.get("port") ?? "8765";
const sensitivity = Number(params.get("sensitivity") ?? "1e-4");
const plane = (params.get("plane") === "XZ" ? "XZ" : "XY") as DragPlane;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const toastsEl = document.getElementById("toasts") as HTMLElement;
const slidersEl = document.getElementById("sliders") as HTMLElement;

const vm = new ConsoleViewModel();
const renderer = new SceneRenderer(canvas);
const mapper = new PointerDragMapper(plane, sensitivity);
const source = new CommandSource();

vm.connection = "connecting";
const ws = new WebSocket(`ws://${host}:${port}`);

ws.onopen = () => {
  vm.connection = "connected";
};
ws.onclose = () => {
  vm.connection = "disconnected";
  vm.pushToast("error", "gateway connection closed");
};
ws.onmessage = (msg) => {
  const rec = vm.ingestText(String(msg.data));
  if (rec?.type === "hello") rebuildSliders();
};

function now(): number {
  return vm.latestFrame?.t ?? 0;
}

function send(text: string): void {
  if (ws.readyState === WebSocket.OPEN && vm.trialActive) ws.send(text);
}

// --- pointer steering (cartesian mode) ----------------------------------------
let dragging = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});
canvas.addEventListener("pointermove", (ev) => {
  if (!dragging || vm.mode !== "cartesian") return;
  const delta = mapper.drag(ev.clientX - lastX, ev.clientY - lastY);
  lastX = ev.clientX;
  lastY = ev.clientY;
  if (delta) send(source.cartesian(now(), delta.translation, delta.rotation, true));
});

window.addEventListener("keydown", (ev) => {
  if (ev.code === "Space") mapper.clutchEngaged = true;
});
window.addEventListener("keyup", (ev) => {
  if (ev.code === "Space") mapper.clutchEngaged = false;
});

function bindTwist(id: string, axis: [number, number, number], angle: number): void {
  document.getElementById(id)?.addEventListener("click", () => {
    const delta = mapper.twist(axis, angle);
    if (delta && vm.mode === "cartesian") {
      send(source.cartesian(now(), delta.translation, delta.rotation, true));
    }
  });
}
const STEP = 0.04; // rad per click
bindTwist("rx-minus", [1, 0, 0], -STEP);
bindTwist("rx-plus", [1, 0, 0], STEP);
bindTwist("ry-minus", [0, 1, 0], -STEP);
bindTwist("ry-plus", [0, 1, 0], STEP);
bindTwist("rz-minus", [0, 0, 1], -STEP);
bindTwist("rz-plus", [0, 0, 1], STEP);

// --- joint-mode sliders -----------------------------------------------------------
let sliderQ: number[] = [];
let sliderTimer: number | null = null;

function rebuildSliders(): void {
  slidersEl.innerHTML = "";
  if (sliderTimer !== null) window.clearInterval(sliderTimer);
  if (vm.mode !== "joint" || !vm.hello) return;
  const n = vm.hello.model.joints.length;
  sliderQ = vm.latestFrame ? [...vm.latestFrame.q_f] : new Array(n).fill(0);
  for (let i = 0; i < n; i++) {
    const input = document.createElement("input");
    input.type = "range";
    input.min = "-2.8";
    input.max = "2.8";
    input.step = "0.01";
    input.value = String(sliderQ[i] ?? 0);
    input.addEventListener("input", () => {
      sliderQ[i] = Number(input.value);
    });
    const row = document.createElement("label");
    row.textContent = `q${i + 1}`;
    row.appendChild(input);
    slidersEl.appendChild(row);
  }
  let prev = [...sliderQ];
  sliderTimer = window.setInterval(() => {
    if (!vm.trialActive) return;
    const dq = sliderQ.map((v, i) => (v - (prev[i] ?? v)) / 0.05);
    prev = [...sliderQ];
    send(source.joint(now(), [...sliderQ], dq));
  }, 50);
}

// --- effector and trial controls ----------------------------------------------------
function bindButton(id: string, handler: () => void): void {
  document.getElementById(id)?.addEventListener("click", handler);
}

bindButton("start", () => {
  if (ws.readyState === WebSocket.OPEN) ws.send(controlRecord("start"));
});
bindButton("abort", () => {
  if (ws.readyState === WebSocket.OPEN) ws.send(controlRecord("abort"));
});
bindButton("switch", () => {
  const profile = (document.getElementById("profile") as HTMLSelectElement).value;
  if (ws.readyState === WebSocket.OPEN) ws.send(controlRecord("switch", { coupling: profile }));
});
bindButton("grip", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "grip", force: 50 })));
bindButton("release", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "release" })));
bindButton("spindle-on", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "spindle", on: true })));
bindButton("spindle-off", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "spindle", on: false })));
bindButton("suction-on", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "suction", on: true })));
bindButton("suction-off", () => send(source.cartesian(now(), [0, 0, 0], [1, 0, 0, 0], mapper.clutchEngaged, { kind: "suction", on: false })));

// --- render loop -----------------------------------------------------------------------
function paint(): void {
  renderer.render(vm);
  toastsEl.innerHTML = vm.toasts
    .map((t) => `<div class="toast ${t.kind}">${t.text}</div>`)
    .join("");
  requestAnimationFrame(paint);
}
requestAnimationFrame(paint);
