"""Independent, deliberately plain re-implementations used as test oracles."""
import numpy as np
from scipy.signal import convolve2d


def gaussian_window(n, sigma):
    ax = np.arange(n) - (n - 1) / 2
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * sigma * sigma))
    return g / g.sum()


def ssim_loops(x, y, data_range=1.0):
    """Mean SSIM with an explicit loop over every fully-contained 11x11 window."""
    w = gaussian_window(11, 1.5)
    c1, c2 = (0.01 * data_range) ** 2, (0.03 * data_range) ** 2
    vals = []
    for i in range(x.shape[0] - 10):
        for j in range(x.shape[1] - 10):
            a = x[i:i + 11, j:j + 11]
            b = y[i:i + 11, j:j + 11]
            ma, mb = np.sum(w * a), np.sum(w * b)
            va = np.sum(w * (a - ma) ** 2)
            vb = np.sum(w * (b - mb) ** 2)
            cov = np.sum(w * (a - ma) * (b - mb))
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma ** 2 + mb ** 2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def _conv2_same(img, k):
    """MATLAB ``conv2(img, k, 'same')``: true convolution, central part of the full result."""
    full = convolve2d(img, k, mode="full")
    r0, c0 = k.shape[0] // 2, k.shape[1] // 2
    return full[r0:r0 + img.shape[0], c0:c0 + img.shape[1]]


def haarpsi_reference(deg, ref, c=30.0, alpha=4.2):
    """Line-by-line transcription of the published reference algorithm (grey images in [0, 1])."""
    def subsample(img):
        return _conv2_same(img, np.ones((2, 2)) / 4.0)[::2, ::2]

    def wavelet(img):
        out = []
        for scale in (1, 2, 3):
            k = 2.0 ** -scale * np.ones((2 ** scale, 2 ** scale))
            k[: 2 ** scale // 2, :] *= -1
            out.append(_conv2_same(img, k))
        for scale in (1, 2, 3):
            k = 2.0 ** -scale * np.ones((2 ** scale, 2 ** scale))
            k[: 2 ** scale // 2, :] *= -1
            out.append(_conv2_same(img, k.T))
        return out

    a = wavelet(subsample(ref * 255.0))
    b = wavelet(subsample(deg * 255.0))
    num = den = 0.0
    for o in (0, 1):
        sims = [(2 * np.abs(a[3 * o + s]) * np.abs(b[3 * o + s]) + c) / (a[3 * o + s] ** 2 + b[3 * o + s] ** 2 + c)
                for s in (0, 1)]
        local = (sims[0] + sims[1]) / 2
        weight = np.maximum(np.abs(a[3 * o + 2]), np.abs(b[3 * o + 2]))
        num += np.sum(weight / (1 + np.exp(-alpha * local)))
        den += np.sum(weight)
    s = num / den
    return float((np.log(s / (1 - s)) / alpha) ** 2)


def _window_stat(img, win, fn):
    """Per-pixel weighted window statistic with symmetric (mirror) border extension."""
    r = win.shape[0] // 2
    p = np.pad(img, r, mode="symmetric")
    out = np.empty(img.shape)
    for i in range(img.shape[0]):
        for j in range(img.shape[1]):
            out[i, j] = fn(p[i:i + win.shape[0], j:j + win.shape[1]])
    return out


def vif_loops(deg, ref, sigma_n_sq=2.0, eps=1e-10):
    ref = ref * 255.0
    deg = deg * 255.0
    num = den = 0.0
    for scale in range(1, 5):
        n = 2 ** (4 - scale + 1) + 1
        win = gaussian_window(n, n / 5)
        wsum = lambda patch: np.sum(win * patch)
        if scale > 1:
            ref = _window_stat(ref, win, wsum)[::2, ::2]
            deg = _window_stat(deg, win, wsum)[::2, ::2]
        mu1 = _window_stat(ref, win, wsum)
        mu2 = _window_stat(deg, win, wsum)
        s1 = np.maximum(_window_stat(ref * ref, win, wsum) - mu1 ** 2, 0)
        s2 = np.maximum(_window_stat(deg * deg, win, wsum) - mu2 ** 2, 0)
        s12 = _window_stat(ref * deg, win, wsum) - mu1 * mu2
        for i in range(s1.shape[0]):
            for j in range(s1.shape[1]):
                a, b, ab = s1[i, j], s2[i, j], s12[i, j]
                g = ab / (a + eps)
                sv = b - g * ab
                if a < eps:
                    g, sv, a = 0.0, b, 0.0
                if b < eps:
                    g, sv = 0.0, 0.0
                if g < 0:
                    sv, g = b, 0.0
                sv = max(sv, eps)
                num += np.log10(1 + g * g * a / (sv + sigma_n_sq))
                den += np.log10(1 + a / sigma_n_sq)
    return float(num / den)


def fixed_pair(n=32, seed=11):
    """A structured reference and a blurred, noisy, shifted distortion of it."""
    from scipy.ndimage import gaussian_filter

    from dualdomain.phantom import generate_phantom
    ref = generate_phantom("shepp_logan", max(n, 32))[:n, :n] * 0.7 + 0.3 * generate_phantom("smooth_random", max(n, 32), seed)[:n, :n]
    g = np.random.Generator(np.random.Philox(seed))
    deg = np.clip(gaussian_filter(np.roll(ref, 1, axis=1), 0.8) + 0.03 * g.standard_normal(ref.shape), 0, 1)
    return deg, ref
