"""File formats: DDT tensors, motion-log JSON, parameter checkpoints, training CSV."""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .grid import KLineMask
from .inr.model import InrParams, Layout
from .motion import MotionTrace, RigidTransform2D, Segment

DDT_MAGIC = b"DDT1"
DDT_REAL, DDT_COMPLEX = 0, 1
_HEADER = struct.Struct("<4sBII")

CKPT_MAGIC = b"DDCK"
LOG_FIELDS = ("epoch", "omega", "loss_freq", "loss_pixel", "loss_w_freq", "total")


class FormatError(ValueError):
    """A file that does not follow its declared format."""


def encode_ddt(arr: np.ndarray) -> bytes:
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise FormatError("DDT holds 2D grids only")
    h, w = arr.shape
    if np.iscomplexobj(arr):
        payload = np.ascontiguousarray(arr, dtype="<c8").tobytes()
        kind = DDT_COMPLEX
    else:
        payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        kind = DDT_REAL
    return _HEADER.pack(DDT_MAGIC, kind, h, w) + payload


def decode_ddt(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise FormatError("truncated DDT header")
    magic, kind, h, w = _HEADER.unpack_from(blob)
    if magic != DDT_MAGIC:
        raise FormatError(f"bad DDT magic {magic!r}")
    if kind not in (DDT_REAL, DDT_COMPLEX):
        raise FormatError(f"unknown DDT dtype byte {kind}")
    dtype = "<c8" if kind == DDT_COMPLEX else "<f4"
    need = h * w * np.dtype(dtype).itemsize
    payload = blob[_HEADER.size:]
    if len(payload) != need:
        raise FormatError(f"DDT payload has {len(payload)} bytes, header implies {need}")
    return np.frombuffer(payload, dtype=dtype).reshape(h, w).copy()


def write_ddt(path, arr) -> None:
    Path(path).write_bytes(encode_ddt(arr))


def read_ddt(path) -> np.ndarray:
    return decode_ddt(Path(path).read_bytes())


def write_mask(path, mask: KLineMask) -> None:
    write_ddt(path, mask.bits.astype(np.float32)[None, :])


def read_mask(path, axis: str = "rows") -> KLineMask:
    arr = read_ddt(path)
    if np.iscomplexobj(arr) or arr.shape[0] != 1:
        raise FormatError("a mask file must be a real 1xL DDT")
    bits = arr[0]
    if not np.all((bits == 0) | (bits == 1)):
        raise FormatError("mask entries must be 0 or 1")
    return KLineMask(bits.astype(np.uint8), axis)


# ---------------------------------------------------------------------------
# motion log


def trace_to_json(trace: MotionTrace, seed=None, preset=None, axis: str = "rows") -> dict:
    return {
        "n_lines": trace.n_lines,
        "axis": axis,
        "segments": [{"start": s.start, "end": s.end, "theta_rad": s.pose.theta,
                      "tx_px": s.pose.tx, "ty_px": s.pose.ty} for s in trace.segments],
        "seed": seed,
        "preset": preset,
    }


def trace_from_json(doc: dict) -> MotionTrace:
    try:
        segs = tuple(Segment(int(s["start"]), int(s["end"]),
                             RigidTransform2D(float(s["theta_rad"]), float(s["tx_px"]), float(s["ty_px"])))
                     for s in doc["segments"])
        return MotionTrace(int(doc["n_lines"]), segs)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed motion log: {exc}") from None


def write_motion_log(path, trace: MotionTrace, seed=None, preset=None) -> None:
    Path(path).write_text(json.dumps(trace_to_json(trace, seed, preset), indent=2) + "\n", encoding="utf-8")


def read_motion_log(path) -> MotionTrace:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"motion log is not valid JSON: {exc}") from None
    return trace_from_json(doc)


# ---------------------------------------------------------------------------
# checkpoints and training logs


def write_checkpoint(path, params: InrParams) -> None:
    """Layout JSON (length-prefixed) followed by the raw little-endian parameter vector."""
    values = params.values
    header = dict(params.layout.to_json(), dtype=np.dtype(values.dtype).newbyteorder("<").str)
    meta = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC + struct.pack("<I", len(meta)) + meta)
        fh.write(np.ascontiguousarray(values, dtype=header["dtype"]).tobytes())


def read_checkpoint(path) -> InrParams:
    blob = Path(path).read_bytes()
    if blob[:4] != CKPT_MAGIC:
        raise FormatError("not a parameter checkpoint")
    (n,) = struct.unpack_from("<I", blob, 4)
    header = json.loads(blob[8:8 + n].decode("utf-8"))
    values = np.frombuffer(blob[8 + n:], dtype=header["dtype"]).copy()
    return InrParams(values, Layout.from_json(header))


def write_training_log(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_FIELDS)
        for r in records:
            writer.writerow([r.epoch] + [repr(float(getattr(r, k))) for k in LOG_FIELDS[1:]])


def read_training_log(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "epoch" else float(v)) for k, v in row.items()} for row in rows]
