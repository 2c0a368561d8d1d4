"""Dense 2D grids, k-space line masks and elementwise helpers.

Images are plain ``numpy`` arrays of shape ``(height, width)``: real arrays
hold pixel intensities, complex arrays hold k-space samples.  The only
dedicated type is :class:`KLineMask`, which flags whole acquisition lines.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXES = ("rows", "cols")


class SizeError(ValueError):
    """Shapes or lengths that do not agree."""


class ParameterError(ValueError):
    """A parameter outside its admissible range."""


@dataclass(frozen=True)
class KLineMask:
    """Binary per-line mask; ``bits[i] == 1`` marks a motion-corrupted line.

    ``axis='rows'`` means each k-space row is one acquisition line.
    """

    bits: np.ndarray
    axis: str = "rows"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ParameterError(f"axis must be one of {AXES}, got {self.axis!r}")
        bits = np.asarray(self.bits)
        if bits.ndim != 1:
            raise SizeError("mask bits must be a 1D vector")
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ParameterError("mask bits must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return self.bits.size

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def zeros(cls, n: int, axis: str = "rows") -> "KLineMask":
        return cls(np.zeros(n, dtype=np.uint8), axis)

    @classmethod
    def ones(cls, n: int, axis: str = "rows") -> "KLineMask":
        return cls(np.ones(n, dtype=np.uint8), axis)

    def __eq__(self, other):
        if not isinstance(other, KLineMask):
            return NotImplemented
        return self.axis == other.axis and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.axis, self.bits.tobytes()))


def check_same_shape(*arrays):
    shape = np.shape(arrays[0])
    for a in arrays[1:]:
        if np.shape(a) != shape:
            raise SizeError(f"shape mismatch: {shape} vs {np.shape(a)}")


def broadcast_mask(mask: KLineMask, height: int, width: int) -> np.ndarray:
    """Expand a line mask to a full ``height x width`` grid of 0/1 values."""
    n = height if mask.axis == "rows" else width
    if len(mask) != n:
        raise SizeError(
            f"mask of length {len(mask)} does not fit {mask.axis} of a {height}x{width} grid"
        )
    bits = mask.bits.astype(np.float64)
    if mask.axis == "rows":
        return np.repeat(bits[:, None], width, axis=1)
    return np.repeat(bits[None, :], height, axis=0)


def mask_grid_for(mask: KLineMask, grid: np.ndarray) -> np.ndarray:
    return broadcast_mask(mask, *np.shape(grid))


_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply}


def elementwise(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact elementwise ``add``, ``sub`` or ``mul``; real operands are promoted."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ParameterError(f"unknown op {op!r}") from None
    a = np.asarray(a)
    b = np.asarray(b)
    check_same_shape(a, b)
    return fn(a, b)


def magnitude(g: np.ndarray) -> np.ndarray:
    return np.abs(g)


def as_image(data, height: int | None = None, width: int | None = None) -> np.ndarray:
    """Validate (and optionally reshape) real pixel data into a 2D array."""
    arr = np.asarray(data)
    if height is not None:
        if arr.size != height * width:
            raise SizeError(f"expected {height * width} values, got {arr.size}")
        arr = arr.reshape(height, width)
    if arr.ndim != 2:
        raise SizeError("image must be 2D")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("image contains non-finite values")
    return arr


def normalize_range(img: np.ndarray) -> np.ndarray:
    """Affinely rescale intensities to [0, 1]; constant images map to zeros."""
    img = np.asarray(img, dtype=np.float64)
    lo, hi = img.min(), img.max()
    if hi <= lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)
