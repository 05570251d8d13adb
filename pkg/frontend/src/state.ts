/**
 * Canvas session store: markers, scribble strokes, slider state, and
 * the latest completed segmentation.
 *
 * Edits schedule a debounced request.  While one is in flight, newer
 * edits queue a single follow-up that is issued with the latest state
 * once the response lands (latest wins).  Every request carries a
 * monotonically increasing id and a response is applied only when its
 * id is still the newest issued, so an overlapping older response can
 * never overwrite a newer overlay.
 */

import type {
  Point,
  RleMask,
  SegmentRequest,
  SegmentResponse,
} from "./api.js";
import { maskValue, rleDecode } from "./api.js";
import { debounce } from "./debounce.js";

/** Slider bounds for both tuning weights. */
export const PARAM_MIN = 1;
export const PARAM_MAX = 50;

export const MODELS = ["cv", "rsf", "lcv", "hyb", "gav", "pm"] as const;
export type ModelName = (typeof MODELS)[number];

export const DEFAULT_LAMBDA = 3;
export const DEFAULT_THETA = 3;
export const DEFAULT_DEBOUNCE_MS = 250;

export type Transport = (req: SegmentRequest) => Promise<SegmentResponse>;

export interface StoreOptions {
  debounceMs?: number;
}

export interface SessionView {
  markers: readonly Point[];
  strokes: readonly (readonly Point[])[];
  lambda: number;
  theta: number;
  model: ModelName;
  contours: readonly (readonly [number, number][])[];
  mask: RleMask | null;
  pixels: Uint8Array | null;
  tc: number | null;
  iterations: number;
  converged: boolean | null;
  residual: number | null;
  busy: boolean;
  lastError: string | null;
  scribbleViolations: number;
  lastIssued: number;
  lastApplied: number;
}

/** Map a score to the red-to-green heat color used by the TC badge. */
export function tcColor(tc: number): [number, number, number] {
  if (!(tc >= 0 && tc <= 1)) {
    throw new RangeError(`tc must lie in [0, 1], got ${tc}`);
  }
  const scale = (v: number) => Math.floor(v * 255 + 0.5);
  return [scale(1 - tc), scale(tc), 0];
}

export class SessionStore {
  private markers: Point[] = [];
  private strokes: Point[][] = [];
  private lambda = DEFAULT_LAMBDA;
  private theta = DEFAULT_THETA;
  private model: ModelName = "pm";

  private contours: [number, number][][] = [];
  private mask: RleMask | null = null;
  private pixels: Uint8Array | null = null;
  private tc: number | null = null;
  private iterations = 0;
  private converged: boolean | null = null;
  private residual: number | null = null;
  private lastError: string | null = null;
  private scribbleViolations = 0;

  private lastIssued = 0;
  private lastApplied = 0;
  private inFlight = false;
  private queued = false;

  private readonly listeners = new Set<() => void>();
  private readonly debouncedDispatch: ReturnType<typeof debounce>;

  constructor(
    readonly height: number,
    readonly width: number,
    private readonly transport: Transport,
    opts: StoreOptions = {},
  ) {
    this.debouncedDispatch = debounce(
      () => this.dispatch(),
      opts.debounceMs ?? DEFAULT_DEBOUNCE_MS,
    );
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  get state(): SessionView {
    return {
      markers: this.markers,
      strokes: this.strokes,
      lambda: this.lambda,
      theta: this.theta,
      model: this.model,
      contours: this.contours,
      mask: this.mask,
      pixels: this.pixels,
      tc: this.tc,
      iterations: this.iterations,
      converged: this.converged,
      residual: this.residual,
      busy: this.inFlight,
      lastError: this.lastError,
      scribbleViolations: this.scribbleViolations,
      lastIssued: this.lastIssued,
      lastApplied: this.lastApplied,
    };
  }

  get canSegment(): boolean {
    return this.markers.length > 0;
  }

  /**
   * Append a foreground marker.  Returns false, without issuing a
   * request, when the click is outside the image, repeats an existing
   * marker, or lands on a scribbled pixel (markers and hard background
   * must stay disjoint).
   */
  placeMarker(x: number, y: number): boolean {
    const xi = Math.floor(x);
    const yi = Math.floor(y);
    if (!this.inBounds(xi, yi)) return false;
    if (this.markers.some(([mx, my]) => mx === xi && my === yi)) return false;
    if (this.scribbled(xi, yi)) return false;
    this.markers.push([xi, yi]);
    this.schedule();
    this.emit();
    return true;
  }

  /** Remove the last marker; clears the overlay when none remain. */
  undoMarker(): boolean {
    if (this.markers.length === 0) return false;
    this.markers.pop();
    if (this.markers.length === 0) {
      this.clearResults();
    } else {
      this.schedule();
    }
    this.emit();
    return true;
  }

  /**
   * Commit one scribble stroke.  Out-of-bounds pixels are dropped and
   * duplicates collapsed; an empty stroke is a no-op.  Returns null on
   * success, or a message when the stroke touches a marker.
   */
  addStroke(pixels: readonly Point[]): string | null {
    const seen = new Set<number>();
    const stroke: Point[] = [];
    for (const [x, y] of pixels) {
      const xi = Math.floor(x);
      const yi = Math.floor(y);
      if (!this.inBounds(xi, yi)) continue;
      const key = yi * this.width + xi;
      if (seen.has(key)) continue;
      seen.add(key);
      stroke.push([xi, yi]);
    }
    if (stroke.length === 0) return null;
    for (const [mx, my] of this.markers) {
      if (seen.has(my * this.width + mx)) {
        return `stroke overlaps the marker at (${mx}, ${my})`;
      }
    }
    this.strokes.push(stroke);
    this.schedule();
    this.emit();
    return null;
  }

  clearStrokes(): void {
    if (this.strokes.length === 0) return;
    this.strokes = [];
    this.schedule();
    this.emit();
  }

  /** Clamp sliders into [1, 50] and schedule a re-segmentation. */
  setParameters(params: {
    lambda?: number;
    theta?: number;
    model?: ModelName;
  }): void {
    if (params.lambda !== undefined) this.lambda = clampParam(params.lambda);
    if (params.theta !== undefined) this.theta = clampParam(params.theta);
    if (params.model !== undefined) {
      if (!MODELS.includes(params.model)) {
        throw new RangeError(`unknown model ${String(params.model)}`);
      }
      this.model = params.model;
    }
    this.schedule();
    this.emit();
  }

  /**
   * Issue a request immediately, skipping the debounce and the
   * in-flight queue.  May overlap an earlier request; the id check on
   * arrival keeps the overlay consistent.
   */
  segmentNow(): void {
    if (!this.canSegment) return;
    this.debouncedDispatch.cancel();
    this.issue();
  }

  /** Run any pending debounced dispatch now. */
  flushPending(): void {
    this.debouncedDispatch.flush();
  }

  private inBounds(x: number, y: number): boolean {
    return x >= 0 && x < this.width && y >= 0 && y < this.height;
  }

  private scribbled(x: number, y: number): boolean {
    return this.strokes.some((s) => s.some(([sx, sy]) => sx === x && sy === y));
  }

  private schedule(): void {
    if (!this.canSegment) return;
    this.debouncedDispatch();
  }

  private dispatch(): void {
    if (!this.canSegment) return;
    if (this.inFlight) {
      this.queued = true;
      return;
    }
    this.issue();
  }

  private issue(): void {
    const id = ++this.lastIssued;
    this.inFlight = true;
    this.emit();
    this.transport(this.buildRequest()).then(
      (resp) => this.onResponse(id, resp),
      (err) => this.onError(id, err),
    );
  }

  buildRequest(): SegmentRequest {
    const req: SegmentRequest = {
      markers: this.markers.map(([x, y]) => [x, y]),
      fitting: { model: this.model },
      config: { lambda_tilde: this.lambda, theta: this.theta },
    };
    const hard: Point[] = [];
    const seen = new Set<number>();
    for (const stroke of this.strokes) {
      for (const [x, y] of stroke) {
        const key = y * this.width + x;
        if (seen.has(key)) continue;
        seen.add(key);
        hard.push([x, y]);
      }
    }
    if (hard.length > 0) req.hard_background = hard;
    return req;
  }

  private onResponse(id: number, resp: SegmentResponse): void {
    this.inFlight = false;
    if (id === this.lastIssued && id > this.lastApplied) {
      this.lastApplied = id;
      this.contours = resp.contours;
      this.mask = resp.mask;
      this.pixels = rleDecode(resp.mask);
      this.tc = resp.tc;
      this.iterations = resp.iterations;
      this.converged = resp.converged;
      this.residual = resp.residual;
      this.lastError = null;
      this.scribbleViolations = this.countViolations(this.pixels);
    }
    this.drainQueue();
    this.emit();
  }

  private onError(id: number, err: unknown): void {
    this.inFlight = false;
    if (id === this.lastIssued && id > this.lastApplied) {
      this.lastError = err instanceof Error ? err.message : String(err);
    }
    this.drainQueue();
    this.emit();
  }

  private drainQueue(): void {
    if (this.queued && !this.inFlight) {
      this.queued = false;
      if (this.canSegment) this.issue();
    }
  }

  /** Hard-background pixels the latest mask failed to exclude. */
  private countViolations(pixels: Uint8Array): number {
    let count = 0;
    for (const stroke of this.strokes) {
      for (const [x, y] of stroke) {
        if (maskValue(pixels, this.width, x, y)) count++;
      }
    }
    return count;
  }

  private clearResults(): void {
    this.debouncedDispatch.cancel();
    this.queued = false;
    // mark any in-flight response stale so it cannot repaint the overlay
    this.lastApplied = this.lastIssued;
    this.contours = [];
    this.mask = null;
    this.pixels = null;
    this.tc = null;
    this.iterations = 0;
    this.converged = null;
    this.residual = null;
    this.scribbleViolations = 0;
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }
}

function clampParam(v: number): number {
  if (Number.isNaN(v)) return PARAM_MIN;
  return Math.min(PARAM_MAX, Math.max(PARAM_MIN, v));
}
