"""Full-reference image quality: PSNR, SSIM, HaarPSI and pixel-domain VIF.

Constants follow the original metric publications.  Argument order is
``(x, ref)``: ``x`` is the image under test, ``ref`` the ground truth.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import correlate
from scipy.signal import correlate2d

from .grid import ParameterError, SizeError, check_same_shape

PSNR_CAP = 200.0


def _pair(x, ref, min_side: int):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    check_same_shape(x, ref)
    if x.ndim != 2:
        raise SizeError("metrics expect 2D images")
    if min(x.shape) < min_side:
        raise SizeError(f"image sides must be >= {min_side}, got {x.shape}")
    return x, ref


def psnr(x, ref, data_range: float = 1.0) -> float:
    x, ref = _pair(x, ref, 1)
    if data_range <= 0:
        raise ParameterError("data_range must be positive")
    mse = np.mean((x - ref) ** 2)
    if mse < data_range ** 2 * 1e-20:
        return PSNR_CAP
    return float(10.0 * np.log10(data_range ** 2 / mse))


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    c = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(c[:, None] ** 2 + c[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def ssim(x, ref, data_range: float = 1.0, win_size: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean SSIM over all window positions that fit inside the image."""
    x, ref = _pair(x, ref, win_size)
    win = gaussian_kernel(win_size, sigma)

    def filt(a):
        return correlate2d(a, win, mode="valid")

    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_x, mu_y = filt(x), filt(ref)
    sxx = filt(x * x) - mu_x * mu_x
    syy = filt(ref * ref) - mu_y * mu_y
    sxy = filt(x * ref) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


# ---------------------------------------------------------------------------
# HaarPSI


def _avg_subsample(a: np.ndarray) -> np.ndarray:
    h, w = a.shape
    a = np.pad(a, ((0, h % 2), (0, w % 2)))
    return 0.25 * (a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2])


def haar_coefficients(img: np.ndarray, scales: int = 3) -> list[tuple[np.ndarray, np.ndarray]]:
    """Horizontal/vertical Haar responses per scale, aligned like MATLAB ``conv2(.., 'same')``."""
    out = []
    for s in range(1, scales + 1):
        k = 2 ** s
        h = np.full((k, k), 1.0 / k)
        h[k // 2:] *= -1.0
        padded = np.pad(img, ((k // 2 - 1, k // 2), (k // 2 - 1, k // 2)))
        out.append((correlate2d(padded, h, mode="valid"), correlate2d(padded, h.T, mode="valid")))
    return out


def haarpsi(x, ref, c: float = 30.0, alpha: float = 4.2, scales: int = 3) -> float:
    """Haar wavelet-based perceptual similarity of ``x`` to ``ref`` (inputs in [0, 1])."""
    x, ref = _pair(x, ref, 8)
    x = _avg_subsample(x * 255.0)
    ref = _avg_subsample(ref * 255.0)
    cx = haar_coefficients(x, scales)
    cr = haar_coefficients(ref, scales)
    num = 0.0
    den = 0.0
    for o in range(2):
        weight = np.maximum(np.abs(cx[scales - 1][o]), np.abs(cr[scales - 1][o]))
        sim = np.zeros_like(weight)
        for s in range(2):
            a = np.abs(cx[s][o])
            b = np.abs(cr[s][o])
            sim += (2.0 * a * b + c) / (a * a + b * b + c)
        sim /= 2.0
        num += np.sum(weight / (1.0 + np.exp(-alpha * sim)))
        den += np.sum(weight)
    if den == 0.0:
        return 1.0 if np.array_equal(x, ref) else 0.0
    score = num / den
    return float((np.log(score / (1.0 - score)) / alpha) ** 2)


# ---------------------------------------------------------------------------
# VIF


def vif(x, ref, sigma_n_sq: float = 2.0, eps: float = 1e-10) -> float:
    """Pixel-domain VIF over four Gaussian scales, images scaled to 0..255.

    Windows are ``2^(5-s) + 1`` wide with ``sigma = width / 5``.  Filtering
    uses reflected borders so every scale is defined down to 32x32 inputs.
    """
    x, ref = _pair(x, ref, 32)
    dist = x * 255.0
    img = ref * 255.0
    num = 0.0
    den = 0.0
    for scale in range(4):
        n = 2 ** (4 - scale) + 1
        win = gaussian_kernel(n, n / 5.0)

        def filt(a):
            return correlate(a, win, mode="reflect")

        if scale > 0:
            img = filt(img)[::2, ::2]
            dist = filt(dist)[::2, ::2]
        mu1, mu2 = filt(img), filt(dist)
        s1 = np.maximum(filt(img * img) - mu1 * mu1, 0.0)
        s2 = np.maximum(filt(dist * dist) - mu2 * mu2, 0.0)
        s12 = filt(img * dist) - mu1 * mu2

        g = s12 / (s1 + eps)
        sv = s2 - g * s12
        low1 = s1 < eps
        g[low1] = 0.0
        sv[low1] = s2[low1]
        s1[low1] = 0.0
        low2 = s2 < eps
        g[low2] = 0.0
        sv[low2] = 0.0
        neg = g < 0
        sv[neg] = s2[neg]
        g[neg] = 0.0
        sv = np.maximum(sv, eps)

        num += np.sum(np.log10(1.0 + g * g * s1 / (sv + sigma_n_sq)))
        den += np.sum(np.log10(1.0 + s1 / sigma_n_sq))
    if den == 0.0:
        return 1.0 if np.array_equal(x, ref) else 0.0
    return float(num / den)


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float
    haarpsi: float
    vif: float
    data_range: float = 1.0

    def as_percent(self) -> dict:
        """PSNR in dB, the similarity indices as percentages."""
        return {"psnr_db": self.psnr, "ssim_pct": 100.0 * self.ssim,
                "haarpsi_pct": 100.0 * self.haarpsi, "vif_pct": 100.0 * self.vif}

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(x, ref, data_range: float = 1.0) -> MetricReport:
    return MetricReport(psnr(x, ref, data_range), ssim(x, ref, data_range),
                        haarpsi(x, ref), vif(x, ref), data_range)
