"""HTTP inference service: a thin, stateless adapter over the engine.

Every endpoint is a pure function of its request given the loaded model,
so identical requests produce bytewise-identical responses and requests
may run concurrently. Structured data travels as JSON, images upload as
multipart form files and return as 8-bit RGB PNG bodies.

Error mapping: 400 malformed input (bad image bytes, bad JSON, unknown
attribute, out-of-range value), 413 oversize upload, 422 wrong resolution
when ``strict=true`` (otherwise inputs are resized and a Warning header
is attached), 500 unexpected failure with an opaque incident id.
"""
from __future__ import annotations

import asyncio
import json
import sys
import traceback
import uuid
from functools import wraps
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import __version__
from .apps.inference import Engine
from .images import decode_image, png_bytes, resize_image


class RequestProblem(Exception):
    """A client error with a definite HTTP status."""

    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail
        super().__init__(detail)


def _flag(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _read_image(
    upload: UploadFile,
    engine: Engine,
    max_bytes: int,
    strict: bool,
    warnings: list[str],
) -> np.ndarray:
    name = upload.filename or "image"
    data = upload.file.read()
    if len(data) > max_bytes:
        raise RequestProblem(413, f"{name} exceeds the {max_bytes} byte limit")
    try:
        img = decode_image(data)
    except Exception:
        raise RequestProblem(400, f"{name} is not a decodable image") from None
    s = engine.resolution
    if img.shape[:2] != (s, s):
        got = f"{img.shape[1]}x{img.shape[0]}"
        if strict:
            raise RequestProblem(422, f"{name}: expected {s}x{s}, got {got}")
        warnings.append(f'299 regionswap "{name} resized from {got} to {s}x{s}"')
        img = resize_image(img, s)
    return img.astype(np.float32)


def _png(img01: np.ndarray, warnings: list[str]) -> Response:
    headers = {"Warning": ", ".join(warnings)} if warnings else {}
    return Response(png_bytes(img01), media_type="image/png", headers=headers)


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RequestProblem as exc:
            return JSONResponse({"detail": exc.detail}, status_code=exc.status)
        except ValueError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        except Exception:
            incident = uuid.uuid4().hex
            print(f"internal error {incident}", file=sys.stderr)
            traceback.print_exc()
            return JSONResponse(
                {"detail": "internal error", "id": incident}, status_code=500
            )

    return wrapper


def create_app(
    ckpt_path: str | Path,
    splitter: str = "auto",
    max_bytes: int = 8_000_000,
    timeout_seconds: float = 0.0,
) -> FastAPI:
    engine = Engine.from_checkpoint(ckpt_path, splitter=splitter)
    app = FastAPI(title="regionswap", version=__version__)
    app.state.engine = engine
    app.state.max_bytes = max_bytes

    @app.exception_handler(RequestValidationError)
    async def _validation_as_bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse({"detail": str(exc.errors())}, status_code=400)

    if timeout_seconds > 0:

        @app.middleware("http")
        async def _deadline(request: Request, call_next):
            try:
                return await asyncio.wait_for(call_next(request), timeout=timeout_seconds)
            except asyncio.TimeoutError:
                return JSONResponse({"detail": "request timed out"}, status_code=504)

    def state(request: Request) -> tuple[Engine, int]:
        return request.app.state.engine, request.app.state.max_bytes

    @app.get("/health")
    def health(request: Request):
        eng, _ = state(request)
        return {
            "status": "ok",
            "model_resolution": eng.resolution,
            "n_attr": len(eng.attr_names),
        }

    @app.get("/attributes")
    def attributes(request: Request):
        eng, _ = state(request)
        return eng.attr_names

    @app.post("/encode")
    @_guarded
    def encode(
        request: Request, image: UploadFile, strict: str = Form("false")
    ):
        eng, limit = state(request)
        warnings: list[str] = []
        img = _read_image(image, eng, limit, _flag(strict), warnings)
        doc = eng.encode(img).to_json()
        headers = {"Warning": ", ".join(warnings)} if warnings else {}
        return JSONResponse(doc, headers=headers)

    @app.post("/swap")
    @_guarded
    def swap(
        request: Request,
        source: UploadFile,
        target: UploadFile,
        gd: str = Form("false"),
        strict: str = Form("false"),
    ):
        eng, limit = state(request)
        warnings: list[str] = []
        src = _read_image(source, eng, limit, _flag(strict), warnings)
        tgt = _read_image(target, eng, limit, _flag(strict), warnings)
        out = eng.swap_gd(src, tgt) if _flag(gd) else eng.swap(src, tgt)
        return _png(out, warnings)

    @app.post("/edit")
    @_guarded
    def edit(
        request: Request,
        image: UploadFile,
        deltas: str = Form("{}"),
        region: str = Form("both"),
        strict: str = Form("false"),
    ):
        eng, limit = state(request)
        warnings: list[str] = []
        img = _read_image(image, eng, limit, _flag(strict), warnings)
        try:
            parsed = json.loads(deltas)
        except json.JSONDecodeError as exc:
            raise RequestProblem(400, f"deltas is not valid JSON: {exc}") from None
        if not isinstance(parsed, dict):
            raise RequestProblem(400, "deltas must be a JSON object of name -> value")
        updates = {}
        for key, value in parsed.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise RequestProblem(400, f"delta {key!r} must be a number")
            updates[str(key)] = float(value)
        return _png(eng.edit(img, updates, region=region), warnings)

    @app.post("/sample")
    @_guarded
    def sample(
        request: Request,
        image: UploadFile | None = None,
        region: str = Form("both"),
        seed: int = Form(0),
        strict: str = Form("false"),
    ):
        eng, limit = state(request)
        warnings: list[str] = []
        base = (
            _read_image(image, eng, limit, _flag(strict), warnings)
            if image is not None
            else None
        )
        out = eng.sample_parts(1, seed=seed, vary=region, base01=base)[0]
        return _png(out, warnings)

    @app.post("/interpolate")
    @_guarded
    def interpolate(
        request: Request,
        a: UploadFile,
        b: UploadFile,
        t: float = Form(...),
        region: str = Form("both"),
        strict: str = Form("false"),
    ):
        eng, limit = state(request)
        warnings: list[str] = []
        img_a = _read_image(a, eng, limit, _flag(strict), warnings)
        img_b = _read_image(b, eng, limit, _flag(strict), warnings)
        return _png(eng.interpolate_at(img_a, img_b, t, vary=region), warnings)

    return app
