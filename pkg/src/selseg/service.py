"""Local HTTP service exposing segmentation sessions to the marker UI.

A session holds one uploaded image plus caches that survive marker
edits: the geodesic speed field q (depends only on the image) and the
distance fields keyed by the exact marker set, since D depends on the
markers while q and g do not.  Segmentation requests within a session
are serialized; sessions are isolated.  Responses are rendered through
one canonical JSON encoder so identical requests yield byte-identical
bodies.
"""

import json
import threading
import uuid
from dataclasses import fields as dataclass_fields

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from skimage import measure

from .fitting import FittingSpec
from .geodesic import MarkerInput, geodesic_distance, uniform_speed, edge_speed
from .image_io import decode_image, decode_mask, encode_image_png
from .metrics import tanimoto
from .solver import SolverConfig, segment

_FITTING_KEYS = {f.name for f in dataclass_fields(FittingSpec)}
_CONFIG_KEYS = {f.name for f in dataclass_fields(SolverConfig)}


class _Session:
    def __init__(self, image):
        self.image = image
        self.gt = None
        self.speed = edge_speed(image)
        self.distances = {}
        self.lock = threading.Lock()


class _ApiError(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status
        self.message = str(message)


def _json_bytes(payload):
    return json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


def _json_response(payload, status=200):
    return Response(
        content=_json_bytes(payload), status_code=status, media_type="application/json"
    )


def rle_encode(mask):
    """Run-length encode a BinaryMask over row-major order.

    Returns {"height", "width", "runs"} with runs as [start, length]
    pairs into the flattened array.
    """
    flat = np.asarray(mask.data, dtype=np.int8).ravel()
    padded = np.concatenate((np.zeros(1, dtype=np.int8), flat, np.zeros(1, dtype=np.int8)))
    diff = np.diff(padded)
    starts = np.nonzero(diff == 1)[0]
    ends = np.nonzero(diff == -1)[0]
    return {
        "height": mask.height,
        "width": mask.width,
        "runs": [[int(s), int(e - s)] for s, e in zip(starts, ends)],
    }


def _parse_points(raw, what, height, width):
    if not isinstance(raw, list) or not raw:
        raise _ApiError(400, f"{what} must be a non-empty list of [x, y] pairs")
    points = []
    for item in raw:
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            raise _ApiError(400, f"{what} must hold integer [x, y] pairs")
        x, y = item
        if not (0 <= x < width and 0 <= y < height):
            raise _ApiError(400, f"{what} pixel ({x}, {y}) outside {width}x{height} image")
        points.append((x, y))
    return points


def _build_spec(raw, keys, factory, what):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise _ApiError(400, f"{what} must be a JSON object")
    unknown = set(raw) - keys
    if unknown:
        raise _ApiError(400, f"unknown {what} fields: {sorted(unknown)}")
    try:
        return factory(**raw)
    except (TypeError, ValueError) as exc:
        raise _ApiError(400, f"bad {what}: {exc}")


def _contours(u, level):
    polylines = []
    for arr in measure.find_contours(u, level):
        # find_contours yields (row, col); the wire format is (x, y).
        polylines.append([[float(c), float(r)] for r, c in arr])
    return polylines


def create_app():
    app = FastAPI(title="selseg service")
    # the browser UI is served as static files from another origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = {}
    store_lock = threading.Lock()

    def get_session(session_id):
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise _ApiError(404, f"unknown session {session_id}")
        return session

    @app.exception_handler(_ApiError)
    async def handle_api_error(request, exc):
        return _json_response({"detail": exc.message}, status=exc.status)

    @app.post("/session")
    async def create_session(request: Request):
        raw = await request.body()
        try:
            image = decode_image(raw)
        except ValueError as exc:
            raise _ApiError(400, f"cannot decode image: {exc}")
        session_id = uuid.uuid4().hex
        with store_lock:
            sessions[session_id] = _Session(image)
        return _json_response(
            {"id": session_id, "height": image.height, "width": image.width}
        )

    @app.post("/session/{session_id}/gt")
    async def upload_gt(session_id: str, request: Request):
        session = get_session(session_id)
        raw = await request.body()
        try:
            gt = decode_mask(raw)
        except ValueError as exc:
            raise _ApiError(400, f"cannot decode mask: {exc}")
        if gt.shape != session.image.shape:
            raise _ApiError(
                400,
                f"ground truth shape {gt.shape} does not match image {session.image.shape}",
            )
        with session.lock:
            session.gt = gt
        return _json_response({"height": gt.height, "width": gt.width})

    @app.get("/session/{session_id}/image")
    def session_image(session_id: str):
        session = get_session(session_id)
        return Response(content=encode_image_png(session.image), media_type="image/png")

    @app.delete("/session/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with store_lock:
            if sessions.pop(session_id, None) is None:
                raise _ApiError(404, f"unknown session {session_id}")
        return Response(status_code=204)

    @app.post("/session/{session_id}/segment")
    def run_segment(session_id: str, payload: dict):
        session = get_session(session_id)
        image = session.image
        markers = _parse_points(
            payload.get("markers"), "markers", image.height, image.width
        )
        hard = None
        hard_key = None
        if payload.get("hard_background"):
            hard = _parse_points(
                payload["hard_background"], "hard_background", image.height, image.width
            )
            hard_key = tuple(sorted(set(hard)))
        spec = _build_spec(payload.get("fitting"), _FITTING_KEYS, FittingSpec, "fitting")
        cfg = _build_spec(payload.get("config"), _CONFIG_KEYS, SolverConfig, "config")
        try:
            marker_input = MarkerInput.from_points(
                markers, image.height, image.width, hard_background=hard
            )
        except ValueError as exc:
            raise _ApiError(400, str(exc))
        with session.lock:
            cache_key = (cfg.distance, tuple(markers), hard_key)
            distance = session.distances.get(cache_key)
            if distance is None:
                q = session.speed if cfg.distance == "geodesic" else uniform_speed(image.shape)
                distance = geodesic_distance(q, marker_input)
                session.distances[cache_key] = distance
            result = segment(image, marker_input, spec, cfg, distance=distance)
            gt = session.gt
        tc = None
        if gt is not None:
            tc = float(tanimoto(result.mask, gt).tc)
        body = {
            "mask": rle_encode(result.mask),
            "contours": _contours(result.u, cfg.gamma),
            "iterations": result.iterations,
            "converged": result.converged,
            "residual": float(result.residual),
            "tc": tc,
        }
        return _json_response(body, status=200 if result.converged else 422)

    return app


app = create_app()
