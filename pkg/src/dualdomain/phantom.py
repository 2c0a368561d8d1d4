"""Analytic test images that stand in for acquired MR slices."""
from __future__ import annotations

import numpy as np

from .grid import ParameterError

# Modified Shepp-Logan (Toft): intensity, semi-axis a, semi-axis b, x0, y0, angle [deg]
SHEPP_LOGAN_ELLIPSES = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)

KINDS = ("shepp_logan", "smooth_random")


def pixel_centers(n: int) -> np.ndarray:
    """Pixel-center coordinates ``(i + 0.5) / n * 2 - 1`` in [-1, 1]."""
    return (np.arange(n) + 0.5) / n * 2.0 - 1.0


def shepp_logan(size: int) -> np.ndarray:
    """Ten-ellipse Shepp-Logan phantom evaluated at pixel centers, in [0, 1].

    Row index increases downwards, so ``y = -row_coordinate`` keeps the
    conventional orientation (ventricles above the small bottom ellipses).
    """
    c = pixel_centers(size)
    x = c[None, :]
    y = -c[:, None]
    img = np.zeros((size, size))
    for rho, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        t = np.deg2rad(deg)
        xr = (x - x0) * np.cos(t) + (y - y0) * np.sin(t)
        yr = -(x - x0) * np.sin(t) + (y - y0) * np.cos(t)
        img = img + rho * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    # exact table sums give values in [0, 1]; clip round-off
    return np.clip(img, 0.0, 1.0)


def smooth_random(size: int, seed: int, cutoff: float = 0.08) -> np.ndarray:
    """Seeded band-limited noise: white noise low-passed in k-space, rescaled to [0, 1]."""
    rng = np.random.Generator(np.random.Philox(seed))
    noise = rng.standard_normal((size, size))
    k = np.fft.fftfreq(size)
    radius = np.hypot(k[:, None], k[None, :])
    smooth = np.fft.ifft2(np.fft.fft2(noise) * (radius <= cutoff)).real
    lo, hi = smooth.min(), smooth.max()
    return (smooth - lo) / (hi - lo)


def generate_phantom(kind: str = "shepp_logan", size: int = 128, seed: int = 0) -> np.ndarray:
    if size < 32:
        raise ParameterError(f"phantom size must be >= 32, got {size}")
    if kind == "shepp_logan":
        return shepp_logan(size)
    if kind == "smooth_random":
        return smooth_random(size, seed)
    raise ParameterError(f"unknown phantom kind {kind!r}; expected one of {KINDS}")
