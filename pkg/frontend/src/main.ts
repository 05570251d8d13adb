/**
 * Browser entry point.  Wires the session store to a canvas: left
 * clicks place red markers, drags in scribble mode paint blue hard
 * background, sliders tune the two weights, and the contour returned
 * by the service is drawn over the image.
 */

import { maskToPgm, SegmentService } from "./api.js";
import type { Point, SegmentRequest } from "./api.js";
import {
  DEFAULT_LAMBDA,
  DEFAULT_THETA,
  MODELS,
  PARAM_MAX,
  PARAM_MIN,
  SessionStore,
  tcColor,
} from "./state.js";
import type { ModelName } from "./state.js";

const BRUSH = 1; // scribble brush radius in image pixels

interface App {
  service: SegmentService;
  sessionId: string;
  store: SessionStore;
  bitmap: ImageBitmap;
  scale: number;
  hasGt: boolean;
}

let app: App | null = null;
let tool: "marker" | "scribble" = "marker";
let currentStroke: Point[] | null = null;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const canvas = $<HTMLCanvasElement>("canvas");
const status = $<HTMLElement>("status");
const tcBadge = $<HTMLElement>("tc-badge");
const serviceUrl = $<HTMLInputElement>("service-url");
const imageFile = $<HTMLInputElement>("image-file");
const gtFile = $<HTMLInputElement>("gt-file");
const toolMarker = $<HTMLInputElement>("tool-marker");
const toolScribble = $<HTMLInputElement>("tool-scribble");
const undoButton = $<HTMLButtonElement>("undo");
const clearButton = $<HTMLButtonElement>("clear-scribble");
const segmentButton = $<HTMLButtonElement>("segment");
const downloadButton = $<HTMLButtonElement>("download-mask");
const lambdaSlider = $<HTMLInputElement>("lambda");
const thetaSlider = $<HTMLInputElement>("theta");
const lambdaValue = $<HTMLElement>("lambda-value");
const thetaValue = $<HTMLElement>("theta-value");
const modelSelect = $<HTMLSelectElement>("model");

function setStatus(text: string, isError = false): void {
  status.textContent = text;
  status.classList.toggle("error", isError);
}

/** Brief red flash on the canvas border for an ignored click. */
function flashCue(): void {
  canvas.classList.remove("cue");
  void canvas.offsetWidth; // restart the animation
  canvas.classList.add("cue");
}

function toImage(ev: MouseEvent): Point | null {
  if (!app) return null;
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor((ev.clientX - rect.left) / app.scale);
  const y = Math.floor((ev.clientY - rect.top) / app.scale);
  if (x < 0 || x >= app.store.width || y < 0 || y >= app.store.height) return null;
  return [x, y];
}

/** Stamp a square brush around each sample so drags leave a solid band. */
function stamp(stroke: Point[], [cx, cy]: Point): void {
  for (let dy = -BRUSH; dy <= BRUSH; dy++) {
    for (let dx = -BRUSH; dx <= BRUSH; dx++) {
      stroke.push([cx + dx, cy + dy]);
    }
  }
}

function render(): void {
  if (!app) return;
  const { store, bitmap, scale } = app;
  const view = store.state;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(bitmap, 0, 0, canvas.width, canvas.height);

  ctx.fillStyle = "rgba(64, 128, 255, 0.55)";
  for (const stroke of view.strokes) {
    for (const [x, y] of stroke) ctx.fillRect(x * scale, y * scale, scale, scale);
  }
  if (currentStroke) {
    for (const [x, y] of currentStroke) {
      ctx.fillRect(x * scale, y * scale, scale, scale);
    }
  }

  ctx.strokeStyle = "#b7ff3c";
  ctx.lineWidth = 2;
  for (const contour of view.contours) {
    if (contour.length < 2) continue;
    ctx.beginPath();
    ctx.moveTo((contour[0][0] + 0.5) * scale, (contour[0][1] + 0.5) * scale);
    for (let i = 1; i < contour.length; i++) {
      ctx.lineTo((contour[i][0] + 0.5) * scale, (contour[i][1] + 0.5) * scale);
    }
    ctx.closePath();
    ctx.stroke();
  }

  ctx.fillStyle = "#ff3b30";
  for (const [x, y] of view.markers) {
    ctx.beginPath();
    ctx.arc((x + 0.5) * scale, (y + 0.5) * scale, Math.max(3, scale * 0.6), 0, 2 * Math.PI);
    ctx.fill();
  }

  segmentButton.disabled = !store.canSegment || view.busy;
  undoButton.disabled = view.markers.length === 0;
  clearButton.disabled = view.strokes.length === 0;
  downloadButton.disabled = view.pixels === null;

  if (view.tc !== null) {
    const [r, g, b] = tcColor(view.tc);
    tcBadge.textContent = `TC ${view.tc.toFixed(3)}`;
    tcBadge.style.background = `rgb(${r}, ${g}, ${b})`;
    tcBadge.style.visibility = "visible";
  } else {
    tcBadge.style.visibility = app.hasGt ? "visible" : "hidden";
    tcBadge.textContent = "TC ?";
    tcBadge.style.background = "#777";
  }

  if (view.lastError) {
    setStatus(view.lastError, true);
  } else if (view.busy) {
    setStatus("segmenting ...");
  } else if (view.scribbleViolations > 0) {
    setStatus(
      `warning: ${view.scribbleViolations} scribbled pixel(s) remain in the mask`,
      true,
    );
  } else if (view.mask) {
    const conv = view.converged ? "converged" : "iteration cap hit";
    setStatus(`${conv} after ${view.iterations} iterations`);
  } else {
    setStatus(store.canSegment ? "ready" : "place a marker to segment");
  }
}

async function openSession(bytes: Uint8Array): Promise<void> {
  const service = new SegmentService(serviceUrl.value.replace(/\/+$/, ""));
  const info = await service.createSession(bytes);
  const blob = new Blob([await service.fetchImage(info.id)], { type: "image/png" });
  const bitmap = await createImageBitmap(blob);
  const scale = Math.max(1, Math.floor(640 / Math.max(info.width, info.height)));
  canvas.width = info.width * scale;
  canvas.height = info.height * scale;

  const transport = (req: SegmentRequest) => service.segment(info.id, req);
  const store = new SessionStore(info.height, info.width, transport);
  store.subscribe(render);
  app = { service, sessionId: info.id, store, bitmap, scale, hasGt: false };
  render();
}

function wireEvents(): void {
  imageFile.addEventListener("change", async () => {
    const file = imageFile.files?.[0];
    if (!file) return;
    try {
      await openSession(new Uint8Array(await file.arrayBuffer()));
      setStatus(`session open, ${app!.store.width}x${app!.store.height}`);
    } catch (err) {
      setStatus(err instanceof Error ? err.message : String(err), true);
    }
  });

  gtFile.addEventListener("change", async () => {
    const file = gtFile.files?.[0];
    if (!file || !app) return;
    try {
      const bytes = new Uint8Array(await file.arrayBuffer());
      await app.service.uploadGroundTruth(app.sessionId, bytes);
      app.hasGt = true;
      setStatus("ground truth uploaded, TC will show on the next run");
      render();
    } catch (err) {
      setStatus(err instanceof Error ? err.message : String(err), true);
    }
  });

  canvas.addEventListener("mousedown", (ev) => {
    if (!app || ev.button !== 0) return;
    const p = toImage(ev);
    if (tool === "marker") {
      if (p === null || !app.store.placeMarker(p[0], p[1])) flashCue();
      return;
    }
    currentStroke = [];
    if (p) stamp(currentStroke, p);
    render();
  });

  canvas.addEventListener("mousemove", (ev) => {
    if (!app || currentStroke === null) return;
    const p = toImage(ev);
    if (p) stamp(currentStroke, p);
    render();
  });

  const endStroke = () => {
    if (!app || currentStroke === null) return;
    const stroke = currentStroke;
    currentStroke = null;
    const message = app.store.addStroke(stroke);
    if (message) setStatus(message, true);
    render();
  };
  canvas.addEventListener("mouseup", endStroke);
  canvas.addEventListener("mouseleave", endStroke);

  toolMarker.addEventListener("change", () => (tool = "marker"));
  toolScribble.addEventListener("change", () => (tool = "scribble"));

  undoButton.addEventListener("click", () => app?.store.undoMarker());
  clearButton.addEventListener("click", () => app?.store.clearStrokes());
  segmentButton.addEventListener("click", () => app?.store.segmentNow());

  downloadButton.addEventListener("click", () => {
    if (!app) return;
    const view = app.store.state;
    if (!view.pixels) return;
    const bytes = maskToPgm(view.pixels, app.store.height, app.store.width);
    const blob = new Blob([bytes], { type: "application/octet-stream" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "mask.pgm";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  lambdaSlider.addEventListener("input", () => {
    lambdaValue.textContent = lambdaSlider.value;
    app?.store.setParameters({ lambda: Number(lambdaSlider.value) });
  });
  thetaSlider.addEventListener("input", () => {
    thetaValue.textContent = thetaSlider.value;
    app?.store.setParameters({ theta: Number(thetaSlider.value) });
  });
  modelSelect.addEventListener("change", () => {
    app?.store.setParameters({ model: modelSelect.value as ModelName });
  });
}

function init(): void {
  for (const name of MODELS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name.toUpperCase();
    if (name === "pm") opt.selected = true;
    modelSelect.appendChild(opt);
  }
  for (const slider of [lambdaSlider, thetaSlider]) {
    slider.min = String(PARAM_MIN);
    slider.max = String(PARAM_MAX);
  }
  lambdaSlider.value = String(DEFAULT_LAMBDA);
  thetaSlider.value = String(DEFAULT_THETA);
  lambdaValue.textContent = lambdaSlider.value;
  thetaValue.textContent = thetaSlider.value;
  wireEvents();
  setStatus("load an image to start");
}

init();
