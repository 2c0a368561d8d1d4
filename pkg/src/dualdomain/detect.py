"""Motion-line masks: a deterministic k-space detector, the 30% line rule, oracle helpers.

The detector relies on conjugate symmetry: the k-space of a real object seen
under a single pose satisfies ``F(-k) = conj(F(k))``.  Lines ``k`` and ``-k``
acquired under different poses break that symmetry, so their residual marks
them as motion-corrupted, while a motion-free acquisition scores exactly 0.
"""
from __future__ import annotations

import numpy as np

from .grid import AXES, KLineMask, ParameterError, SizeError

# relative residuals below this are float64 round-off
ROUNDOFF = 1e-24
# lines carrying less than this share of the mean line energy are scored against the floor
ENERGY_FLOOR = 1e-8


def _lines(f: np.ndarray, axis: str) -> np.ndarray:
    if axis not in AXES:
        raise ParameterError(f"axis must be one of {AXES}")
    f = np.asarray(f)
    return f if axis == "rows" else f.T


def mirror_index(n: int) -> np.ndarray:
    """Index of frequency ``-k`` for every centered index (Nyquist maps to itself)."""
    return (2 * (n // 2) - np.arange(n)) % n


def score_lines(f: np.ndarray, axis: str = "rows") -> np.ndarray:
    """Conjugate-symmetry residual of every line against its mirror line.

    ``||F_i - conj(F_mirror(i))[::-1]||^2 / (||F_i||^2 + ||F_mirror(i)||^2)``,
    in [0, 2]; higher means the line and its mirror disagree on the pose.
    The denominator is floored at ``ENERGY_FLOOR`` times its mean so that
    near-empty high-frequency lines do not turn round-off into large scores.
    """
    lines = _lines(f, axis)
    n, m = lines.shape
    if n < 8:
        raise SizeError(f"need at least 8 lines to score, got {n}")
    partner = np.conj(lines[mirror_index(n)][:, mirror_index(m)])
    num = np.sum(np.abs(lines - partner) ** 2, axis=1)
    den = np.sum(np.abs(lines) ** 2, axis=1) + np.sum(np.abs(partner) ** 2, axis=1)
    floor = ENERGY_FLOOR * float(np.mean(den))
    score = np.where(den > 0, num / np.maximum(den, floor if floor > 0 else 1.0), 0.0)
    return np.where(score < ROUNDOFF, 0.0, score)


def threshold_mask(scores: np.ndarray, z: float = 2.5, axis: str = "rows") -> KLineMask:
    """Flag lines whose score exceeds ``median + z * MAD``."""
    if not z > 0:
        raise ParameterError("z must be positive")
    scores = np.asarray(scores, dtype=np.float64)
    if np.isinf(z):
        return KLineMask.zeros(scores.size, axis)
    med = np.median(scores)
    mad = np.median(np.abs(scores - med))
    return KLineMask((scores > med + z * mad).astype(np.uint8), axis)


def detect_mask(f: np.ndarray, axis: str = "rows", z: float | None = None,
                tol: float = 1e-6) -> KLineMask:
    """Flag motion-corrupted lines of an observed k-space.

    By default every line whose symmetry residual exceeds ``tol`` is flagged.
    Passing ``z`` switches to the robust outlier rule of :func:`threshold_mask`
    (useful when most lines are clean and only the worst should be kept).
    """
    scores = score_lines(f, axis)
    if z is not None:
        bits = threshold_mask(scores, z, axis).bits.astype(bool) & (scores > tol)
    else:
        bits = scores > tol
    return KLineMask(bits.astype(np.uint8), axis)


def column_rule(prob_map: np.ndarray, frac: float = 0.30, axis: str = "rows") -> KLineMask:
    """Flag a line when more than ``frac`` of its samples have probability > 0.5."""
    if not 0.0 < frac < 1.0:
        raise ParameterError(f"frac must lie in (0, 1), got {frac}")
    p = np.asarray(prob_map, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ParameterError("probabilities must lie in [0, 1]")
    lines = _lines(p, axis)
    share = np.mean(lines > 0.5, axis=1)
    return KLineMask((share > frac).astype(np.uint8), axis)


def complement(mask: KLineMask) -> KLineMask:
    return KLineMask(1 - mask.bits, mask.axis)


def line_precision_recall(pred: KLineMask, truth: KLineMask) -> tuple[float, float]:
    """Line-level precision and recall; an empty prediction has precision 1."""
    p = pred.bits.astype(bool)
    t = truth.bits.astype(bool)
    tp = np.sum(p & t)
    precision = tp / p.sum() if p.sum() else 1.0
    recall = tp / t.sum() if t.sum() else 1.0
    return float(precision), float(recall)
