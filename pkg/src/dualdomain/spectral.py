"""Centered, unitary 2D Fourier transforms and the low/high frequency split.

The zero frequency sits at index ``(H // 2, W // 2)`` and both directions
are scaled by ``1 / sqrt(H * W)``, so pixel-domain and k-space mean squared
errors agree (Parseval).
"""
from __future__ import annotations

import math

import numpy as np

from .grid import ParameterError, SizeError


def _check_size(x):
    x = np.asarray(x)
    if x.ndim < 2 or min(x.shape[-2:]) < 2:
        raise SizeError(f"transform needs at least 2 samples per axis, got shape {x.shape}")
    return x


def _out_dtype(x):
    # single-precision inputs are transformed in double and rounded once on the way out
    return np.complex64 if x.dtype in (np.float32, np.complex64, np.float16) else np.complex128


def fft2c(x: np.ndarray) -> np.ndarray:
    x = _check_size(x)
    axes = (-2, -1)
    out = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x.astype(np.complex128), axes=axes), norm="ortho"),
                          axes=axes)
    return out.astype(_out_dtype(x), copy=False)


def ifft2c(f: np.ndarray) -> np.ndarray:
    f = _check_size(f)
    axes = (-2, -1)
    out = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(f.astype(np.complex128), axes=axes), norm="ortho"),
                          axes=axes)
    return out.astype(_out_dtype(f), copy=False)


def _span(n: int, fraction: float) -> slice:
    width = max(1, min(n, math.floor(fraction * n + 0.5)))
    start = n // 2 - width // 2
    return slice(start, start + width)


def lowpass_window(height: int, width: int, fraction: float) -> np.ndarray:
    """Binary window: ones on the centered block covering ``fraction`` of each axis."""
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction}")
    win = np.zeros((height, width))
    win[_span(height, fraction), _span(width, fraction)] = 1.0
    return win


def split_low_high(f: np.ndarray, fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Complementary split ``f = low + high`` around the k-space center."""
    f = np.asarray(f)
    win = lowpass_window(*f.shape, fraction)
    return f * win, f * (1.0 - win)
