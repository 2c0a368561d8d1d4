"""Inter-shot rigid motion: pose sampling, resampling and k-space corruption.

Acquisition lines are k-space rows, acquired in index order.  A motion
trace splits the rows into contiguous segments; each segment is acquired
under one rigid pose, and the first segment is the reference (identity).

Random draws use numpy's ``Philox`` counter-based generator seeded with the
caller's integer, so traces are reproducible from ``(preset, n_lines, seed)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import KLineMask, ParameterError, SizeError
from .spectral import fft2c, ifft2c


@dataclass(frozen=True)
class RigidTransform2D:
    """In-plane rotation ``theta`` [rad] about the image center, then a shift in pixels.

    ``tx`` moves content towards larger column indices, ``ty`` towards larger rows.
    """

    theta: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        vals = (self.theta, self.tx, self.ty)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"non-finite rigid transform {vals}")
        if abs(self.theta) > math.pi:
            raise ParameterError(f"|theta| must not exceed pi, got {self.theta}")

    @property
    def is_identity(self) -> bool:
        return self.theta == 0.0 and self.tx == 0.0 and self.ty == 0.0


IDENTITY = RigidTransform2D()


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    pose: RigidTransform2D = IDENTITY


@dataclass(frozen=True)
class MotionTrace:
    n_lines: int
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ParameterError("a motion trace needs at least one segment")
        pos = 0
        for s in segs:
            if s.start != pos or s.end <= s.start:
                raise ParameterError("segments must partition [0, n_lines) contiguously in order")
            pos = s.end
        if pos != self.n_lines:
            raise ParameterError(f"segments cover {pos} lines, expected {self.n_lines}")
        if not segs[0].pose.is_identity:
            raise ParameterError("the first segment must carry the identity pose")

    @property
    def n_events(self) -> int:
        return len(self.segments) - 1

    @property
    def boundaries(self) -> list[int]:
        """Line indices at which a new segment starts (the motion events)."""
        return [s.start for s in self.segments[1:]]

    @property
    def poses(self) -> list[RigidTransform2D]:
        return [s.pose for s in self.segments]

    def labels(self) -> np.ndarray:
        """Segment index for every line."""
        lab = np.empty(self.n_lines, dtype=np.int64)
        for i, s in enumerate(self.segments):
            lab[s.start:s.end] = i
        return lab

    def gt_mask(self, axis: str = "rows") -> KLineMask:
        bits = np.zeros(self.n_lines, dtype=np.uint8)
        for s in self.segments:
            if not s.pose.is_identity:
                bits[s.start:s.end] = 1
        return KLineMask(bits, axis)

    @classmethod
    def still(cls, n_lines: int) -> "MotionTrace":
        return cls(n_lines, (Segment(0, n_lines),))


@dataclass(frozen=True)
class SeverityPreset:
    name: str
    event_range: tuple[int, int]
    max_translation: float
    max_rotation: float

    @classmethod
    def named(cls, name: str, max_rot_deg: float = 10.0, mm_per_px: float = 1.0,
              max_shift_mm: float = 10.0) -> "SeverityPreset":
        ranges = {"light": (6, 10), "heavy": (16, 20)}
        if name not in ranges:
            raise ParameterError(f"unknown severity {name!r}; expected light or heavy")
        if mm_per_px <= 0:
            raise ParameterError("mm_per_px must be positive")
        return cls(name, ranges[name], max_shift_mm / mm_per_px, math.radians(max_rot_deg))


LIGHT = SeverityPreset.named("light")
HEAVY = SeverityPreset.named("heavy")


def sample_motion(preset: SeverityPreset, n_lines: int, seed: int) -> MotionTrace:
    lo, hi = preset.event_range
    if n_lines < hi + 2:
        raise ParameterError(f"{n_lines} lines cannot hold up to {hi} motion events")
    rng = np.random.Generator(np.random.Philox(seed))
    n_events = int(rng.integers(lo, hi + 1))
    starts = np.sort(rng.choice(np.arange(1, n_lines), size=n_events, replace=False))
    edges = [0, *starts.tolist(), n_lines]
    segments = [Segment(0, edges[1])]
    for a, b in zip(edges[1:-1], edges[2:]):
        theta, tx, ty = rng.uniform(
            [-preset.max_rotation, -preset.max_translation, -preset.max_translation],
            [preset.max_rotation, preset.max_translation, preset.max_translation],
        )
        segments.append(Segment(a, b, RigidTransform2D(float(theta), float(tx), float(ty))))
    return MotionTrace(n_lines, tuple(segments))


# ---------------------------------------------------------------------------
# bilinear rotation with its adjoint and pose derivative


@dataclass
class RotationPlan:
    """Sampling geometry of one bilinear rotation, reused by the backward pass."""

    shape: tuple[int, int]
    theta: float
    x: np.ndarray  # output offsets from the center, columns
    y: np.ndarray  # rows
    x0: np.ndarray = field(repr=False)
    y0: np.ndarray = field(repr=False)
    fx: np.ndarray = field(repr=False)
    fy: np.ndarray = field(repr=False)


def rotation_plan(shape, theta: float) -> RotationPlan:
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    y, x = np.meshgrid(np.arange(h) - cy, np.arange(w) - cx, indexing="ij")
    c, s = math.cos(theta), math.sin(theta)
    # output pixel p samples the input at R(-theta) p
    xs = c * x + s * y + cx
    ys = -s * x + c * y + cy
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    return RotationPlan((h, w), theta, x, y, x0.astype(np.int64), y0.astype(np.int64),
                        xs - x0, ys - y0)


def _corners(plan: RotationPlan):
    h, w = plan.shape
    for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
        yi = plan.y0 + dy
        xi = plan.x0 + dx
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        wy = plan.fy if dy else 1.0 - plan.fy
        wx = plan.fx if dx else 1.0 - plan.fx
        # d(weight)/d(xs), d(weight)/d(ys)
        dwx = (1.0 if dx else -1.0) * wy
        dwy = (1.0 if dy else -1.0) * wx
        yield np.where(valid, yi, 0), np.where(valid, xi, 0), valid, wy * wx, dwx, dwy


def rotate(img: np.ndarray, theta: float, plan: RotationPlan | None = None) -> np.ndarray:
    """Rotate by ``theta`` about the image center; bilinear, zero fill outside."""
    img = np.asarray(img)
    if theta == 0.0:
        return img.copy()
    plan = plan or rotation_plan(img.shape, theta)
    out = np.zeros(img.shape, dtype=np.result_type(img.dtype, np.float64))
    for yi, xi, valid, wgt, _, _ in _corners(plan):
        out += np.where(valid, wgt * img[yi, xi], 0.0)
    return out.astype(np.result_type(img.dtype, np.float32), copy=False)


def rotate_adjoint(grad: np.ndarray, plan: RotationPlan) -> np.ndarray:
    """Transpose of :func:`rotate` applied to an output-space gradient."""
    h, w = plan.shape
    acc = np.zeros(h * w)
    for yi, xi, valid, wgt, _, _ in _corners(plan):
        acc += np.bincount((yi * w + xi).ravel(), weights=np.where(valid, wgt * grad, 0.0).ravel(),
                           minlength=h * w)
    return acc.reshape(h, w)


def rotate_dtheta(img: np.ndarray, plan: RotationPlan) -> np.ndarray:
    """Per-pixel derivative of the rotated image with respect to ``theta``."""
    c, s = math.cos(plan.theta), math.sin(plan.theta)
    dxs = -s * plan.x + c * plan.y
    dys = -c * plan.x - s * plan.y
    out = np.zeros(plan.shape)
    for yi, xi, valid, _, dwx, dwy in _corners(plan):
        out += np.where(valid, (dwx * dxs + dwy * dys) * img[yi, xi], 0.0)
    return out


# ---------------------------------------------------------------------------
# translation as a k-space phase ramp


def _ramp_1d(n: int, t: float):
    k = np.arange(n) - n // 2
    ramp = np.exp(-2j * np.pi * k * t / n)
    dramp = (-2j * np.pi * k / n) * ramp
    if n % 2 == 0:
        # the Nyquist sample pairs with itself; a real factor keeps shifted real images real
        ramp[0] = math.cos(math.pi * t)
        dramp[0] = -math.pi * math.sin(math.pi * t)
    return ramp, dramp


def shift_ramp(shape, tx: float, ty: float):
    """Return ``(ramp, d ramp/d tx, d ramp/d ty)`` on the centered k-space grid."""
    h, w = shape
    ry, dry = _ramp_1d(h, ty)
    rx, drx = _ramp_1d(w, tx)
    return ry[:, None] * rx[None, :], ry[:, None] * drx[None, :], dry[:, None] * rx[None, :]


def motion_kspace(img: np.ndarray, pose: RigidTransform2D) -> np.ndarray:
    """k-space of ``img`` seen under ``pose``: rotate, transform, then apply the shift ramp."""
    f = fft2c(rotate(img, pose.theta))
    if pose.tx == 0.0 and pose.ty == 0.0:
        return f
    ramp, _, _ = shift_ramp(f.shape, pose.tx, pose.ty)
    return f * ramp


def apply_rigid(img: np.ndarray, t: RigidTransform2D) -> np.ndarray:
    img = np.asarray(img)
    if t.is_identity:
        return img.copy()
    if t.tx == 0.0 and t.ty == 0.0:
        return rotate(img, t.theta)
    return ifft2c(motion_kspace(img, t)).real


def corrupt(clean: np.ndarray, trace: MotionTrace) -> tuple[np.ndarray, KLineMask]:
    """Assemble motion-corrupted k-space segment by segment.

    Returns the corrupted k-space and the ground-truth mask of lines acquired
    under a non-identity pose.
    """
    clean = np.asarray(clean)
    if clean.ndim != 2 or clean.shape[0] != trace.n_lines:
        raise SizeError(f"trace has {trace.n_lines} lines but the image has shape {clean.shape}")
    reference = fft2c(clean)
    out = reference.copy()
    for seg in trace.segments:
        if seg.pose.is_identity:
            continue
        out[seg.start:seg.end] = motion_kspace(clean, seg.pose)[seg.start:seg.end]
    return out, trace.gt_mask()
