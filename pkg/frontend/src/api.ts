/**
 * Wire client for the segmentation service.
 *
 * Mirrors the HTTP endpoints exactly: raw image bytes in, JSON out,
 * masks as row-major run-length pairs over a height x width grid.
 * Nothing here knows about the canvas or the store.
 */

/** Pixel coordinate as [x, y], matching the service wire order. */
export type Point = [number, number];

export interface SessionInfo {
  id: string;
  height: number;
  width: number;
}

/** Run-length mask payload: runs are [start, length] over the flat row-major grid. */
export interface RleMask {
  height: number;
  width: number;
  runs: [number, number][];
}

export interface SegmentRequest {
  markers: Point[];
  hard_background?: Point[];
  fitting?: Record<string, unknown>;
  config?: Record<string, unknown>;
}

export interface SegmentResponse {
  mask: RleMask;
  contours: [number, number][][];
  iterations: number;
  converged: boolean;
  residual: number;
  tc: number | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** Expand a run-length mask to flat 0/1 pixels, row-major. */
export function rleDecode(mask: RleMask): Uint8Array {
  const total = mask.height * mask.width;
  const out = new Uint8Array(total);
  for (const [start, length] of mask.runs) {
    if (!Number.isInteger(start) || !Number.isInteger(length)) {
      throw new RangeError(`run [${start}, ${length}] is not integral`);
    }
    if (start < 0 || length <= 0 || start + length > total) {
      throw new RangeError(`run [${start}, ${length}] exceeds ${total} pixels`);
    }
    out.fill(1, start, start + length);
  }
  return out;
}

/** Read one pixel of a decoded mask. */
export function maskValue(
  pixels: Uint8Array,
  width: number,
  x: number,
  y: number,
): number {
  return pixels[y * width + x];
}

/** Serialize decoded mask pixels as a binary PGM (0/255), for download. */
export function maskToPgm(
  pixels: Uint8Array,
  height: number,
  width: number,
): Uint8Array<ArrayBuffer> {
  if (pixels.length !== height * width) {
    throw new RangeError(`expected ${height * width} pixels, got ${pixels.length}`);
  }
  const header = new TextEncoder().encode(`P5\n${width} ${height}\n255\n`);
  const out = new Uint8Array(new ArrayBuffer(header.length + pixels.length));
  out.set(header, 0);
  for (let i = 0; i < pixels.length; i++) {
    out[header.length + i] = pixels[i] ? 255 : 0;
  }
  return out;
}

export class SegmentService {
  constructor(readonly baseUrl: string) {}

  /** Upload raw image bytes (PGM or PNG) and open a session. */
  async createSession(bytes: Uint8Array): Promise<SessionInfo> {
    const resp = await fetch(`${this.baseUrl}/session`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: bytes as unknown as BodyInit,
    });
    if (resp.status !== 200) throw await toApiError(resp);
    return (await resp.json()) as SessionInfo;
  }

  /** Upload a ground-truth mask; enables the TC readout on later responses. */
  async uploadGroundTruth(
    id: string,
    bytes: Uint8Array,
  ): Promise<{ height: number; width: number }> {
    const resp = await fetch(`${this.baseUrl}/session/${id}/gt`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: bytes as unknown as BodyInit,
    });
    if (resp.status !== 200) throw await toApiError(resp);
    return (await resp.json()) as { height: number; width: number };
  }

  imageUrl(id: string): string {
    return `${this.baseUrl}/session/${id}/image`;
  }

  async fetchImage(id: string): Promise<Uint8Array<ArrayBuffer>> {
    const resp = await fetch(this.imageUrl(id));
    if (resp.status !== 200) throw await toApiError(resp);
    return new Uint8Array(await resp.arrayBuffer());
  }

  async deleteSession(id: string): Promise<void> {
    const resp = await fetch(`${this.baseUrl}/session/${id}`, { method: "DELETE" });
    if (resp.status !== 204) throw await toApiError(resp);
  }

  /**
   * Run one segmentation.  A 422 still carries a full result body (the
   * solver hit its iteration cap without converging), so both 200 and
   * 422 resolve; other statuses reject with ApiError.
   */
  async segment(id: string, req: SegmentRequest): Promise<SegmentResponse> {
    const resp = await fetch(`${this.baseUrl}/session/${id}/segment`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    if (resp.status !== 200 && resp.status !== 422) throw await toApiError(resp);
    return (await resp.json()) as SegmentResponse;
  }
}

async function toApiError(resp: Response): Promise<ApiError> {
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(resp.status, detail);
}
