// App glue: scene loading (file picker or ?src=), orbit/pan/zoom
// controls, overlay readouts, the order-shuffle demo button, and a dev
// probe that quantifies order independence on the live frame.

import { parseWsplat, permuteRecords, WsplatScene } from "./format.js";
import { OrbitCamera } from "./orbit.js";
import { ViewerRenderer } from "./renderer.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const statusEl = document.getElementById("status")!;
const fpsEl = document.getElementById("fps")!;
const infoEl = document.getElementById("info")!;
const probeEl = document.getElementById("probe-result")!;

let renderer: ViewerRenderer;
try {
  renderer = new ViewerRenderer(canvas);
} catch (err) {
  statusEl.textContent = `${err instanceof Error ? err.message : err}`;
  throw err;
}

const camera = new OrbitCamera({ distance: 5, azimuth: 0.6, elevation: 0.35 });
let scene: WsplatScene | null = null;
const backgrounds: Array<[number, number, number] | null> = [
  null, [0, 0, 0], [1, 1, 1], [0.25, 0.25, 0.25],
];
let backgroundIndex = 0;

function setScene(parsed: WsplatScene, name: string): void {
  scene = parsed;
  renderer.loadScene(parsed);
  statusEl.textContent = "";
  infoEl.textContent =
    `${name}: ${parsed.count} splats | weights: ${parsed.weightModel}` +
    (parsed.weightModel === "exp" ? ` (sigma ${parsed.sigma.toFixed(3)}, beta ${parsed.beta.toFixed(3)})` : "") +
    (parsed.weightModel === "lc" ? ` (sigma ${parsed.sigma.toFixed(3)})` : "") +
    ` | SH deg color ${parsed.shDegreeColor} / opacity ${parsed.shDegreeOpacity}`;
}

async function loadFromUrl(url: string): Promise<void> {
  statusEl.textContent = `loading ${url} ...`;
  try {
    const resp = await fetch(url);
    if (!resp.ok) throw new Error(`${resp.status} ${resp.statusText}`);
    setScene(parseWsplat(await resp.arrayBuffer()), url.split("/").pop() ?? url);
  } catch (err) {
    statusEl.textContent = `failed to load ${url}: ${err instanceof Error ? err.message : err}`;
  }
}

(document.getElementById("file") as HTMLInputElement).addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  try {
    setScene(parseWsplat(await file.arrayBuffer()), file.name);
  } catch (err) {
    statusEl.textContent = `failed to parse ${file.name}: ${err instanceof Error ? err.message : err}`;
  }
});

document.getElementById("shuffle")!.addEventListener("click", () => {
  if (!scene) return;
  const order = new Uint32Array(scene.count);
  for (let i = 0; i < scene.count; i += 1) order[i] = i;
  for (let i = scene.count - 1; i > 0; i -= 1) {
    const j = Math.floor(Math.random() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  scene.records = permuteRecords(scene, order);
  renderer.uploadRecords(scene.records);
  probeEl.textContent = "order shuffled - image should not change";
});

document.getElementById("background")!.addEventListener("click", () => {
  backgroundIndex = (backgroundIndex + 1) % backgrounds.length;
  renderer.backgroundOverride = backgrounds[backgroundIndex];
});

document.getElementById("probe")!.addEventListener("click", () => {
  if (!scene) return;
  // Render, shuffle, render again; report the mean abs per-channel
  // difference in 8-bit units. The sums are commutative, so anything
  // beyond float-blend noise indicates a broken pipeline.
  const view = camera.view(canvas.width, canvas.height);
  renderer.renderFrame(view);
  const before = renderer.readFrame(canvas.width, canvas.height);
  const order = new Uint32Array(scene.count);
  for (let i = 0; i < scene.count; i += 1) order[i] = scene.count - 1 - i;
  scene.records = permuteRecords(scene, order);
  renderer.uploadRecords(scene.records);
  renderer.renderFrame(view);
  const after = renderer.readFrame(canvas.width, canvas.height);
  let total = 0;
  let n = 0;
  for (let i = 0; i < before.length; i += 4) {
    total += Math.abs(before[i] - after[i]) + Math.abs(before[i + 1] - after[i + 1])
      + Math.abs(before[i + 2] - after[i + 2]);
    n += 3;
  }
  probeEl.textContent = `order-shuffle probe: mean abs diff ${(total / n).toFixed(4)} / 255`;
});

// --- pointer controls ---------------------------------------------------------

let dragging = false;
let panning = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  panning = ev.shiftKey || ev.button === 2;
  lastX = ev.clientX;
  lastY = ev.clientY;
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});
canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const dx = ev.clientX - lastX;
  const dy = ev.clientY - lastY;
  lastX = ev.clientX;
  lastY = ev.clientY;
  if (panning) {
    camera.pan(-dx / canvas.clientWidth, -dy / canvas.clientHeight);
  } else {
    camera.orbit(dx * 0.008, -dy * 0.008);
  }
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  camera.zoom(Math.exp(ev.deltaY * 0.001));
}, { passive: false });
canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());

// --- render loop with a once-per-second FPS readout ----------------------------

let frames = 0;
let lastFpsTime = performance.now();

function frame(): void {
  const dpr = Math.min(window.devicePixelRatio || 1, 2);
  const width = Math.max(1, Math.floor(canvas.clientWidth * dpr));
  const height = Math.max(1, Math.floor(canvas.clientHeight * dpr));
  if (canvas.width !== width || canvas.height !== height) {
    canvas.width = width;
    canvas.height = height;
  }
  renderer.renderFrame(camera.view(width, height));
  frames += 1;
  const now = performance.now();
  if (now - lastFpsTime >= 1000) {
    fpsEl.textContent = `${((frames * 1000) / (now - lastFpsTime)).toFixed(0)} fps`;
    frames = 0;
    lastFpsTime = now;
  }
  requestAnimationFrame(frame);
}

const src = new URLSearchParams(window.location.search).get("src");
if (src) {
  void loadFromUrl(src);
} else {
  statusEl.textContent = "load a .wsplat scene (file picker above, or ?src=<url>)";
}
requestAnimationFrame(frame);
