"""Dual-domain optimisation: k-space composition, losses, Adam and the fitting loop.

One reconstruction fits a Deartifact INR (the clean image) and a Movement INR
(one rigid pose per motion segment) to a single observed k-space ``f_o``:

* ``f_c = F(i_d) (1 - M) + F(i_m) M`` is the simulated corrupted k-space,
* the frequency loss compares ``f_c`` with ``f_o`` line-weighted by ``omega``,
* the pixel loss compares ``|F^-1 f_c|`` with ``|F^-1 f_o|``,
* ``omega`` falls linearly from 0.5 to 0 across the run.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .grid import KLineMask, ParameterError, SizeError, broadcast_mask, check_same_shape
from .inr.model import DualINR, InrParams
from .inr.render import render_motion_kspace
from .motion import RigidTransform2D
from .spectral import fft2c, ifft2c, split_low_high

log = logging.getLogger(__name__)


class NumericalAbort(RuntimeError):
    """Optimisation stopped on a non-finite value or repeated divergence."""

    def __init__(self, message, epoch=None, checkpoint: InrParams | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.checkpoint = checkpoint


# ---------------------------------------------------------------------------
# k-space composition


def _row_mask(mask: KLineMask, like: np.ndarray) -> np.ndarray:
    if mask.axis != "rows":
        raise ParameterError("the reconstruction uses row (phase-encode) lines")
    return broadcast_mask(mask, *like.shape)


def compose_fc(i_d: np.ndarray, f_m: np.ndarray, mask: KLineMask) -> np.ndarray:
    """``fft2c(i_d)`` on clean lines, the rendered motion k-space on flagged lines."""
    check_same_shape(i_d, f_m)
    m = broadcast_mask(mask, *np.shape(f_m))
    return fft2c(i_d) * (1.0 - m) + f_m * m


def reorganize(f_c: np.ndarray, f_o: np.ndarray, mask: KLineMask, fraction: float = 0.125) -> np.ndarray:
    """Low band of ``f_c`` plus its high band on flagged lines and ``f_o``'s elsewhere."""
    check_same_shape(f_c, f_o)
    m = broadcast_mask(mask, *np.shape(f_c))
    low_c, high_c = split_low_high(f_c, fraction)
    _, high_o = split_low_high(f_o, fraction)
    return low_c + high_c * m + high_o * (1.0 - m)


# ---------------------------------------------------------------------------
# schedule and losses


def omega(t: float, total: int) -> float:
    if total < 1:
        raise ParameterError("total epochs must be >= 1")
    if not 0 <= t <= total:
        raise ParameterError(f"epoch {t} outside [0, {total}]")
    return -t / (2 * total) + 0.5


def loss_freq(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared complex modulus of the residual, and the per-element map."""
    check_same_shape(pred, target)
    d = np.asarray(pred) - np.asarray(target)
    emap = d.real ** 2 + d.imag ** 2 if np.iscomplexobj(d) else d ** 2
    return float(np.mean(emap)), emap


def loss_pixel(pred: np.ndarray, target: np.ndarray) -> float:
    check_same_shape(pred, target)
    d = np.asarray(pred) - np.asarray(target)
    return float(np.mean(np.abs(d) ** 2))


def weighted_freq_loss(error_map: np.ndarray, mask: KLineMask, w: float) -> float:
    if not 0.0 <= w <= 0.5:
        raise ParameterError(f"omega must lie in [0, 0.5], got {w}")
    m = broadcast_mask(mask, *np.shape(error_map))
    return float(w * np.mean(error_map * m) + (1.0 - w) * np.mean(error_map * (1.0 - m)))


def total_loss(loss_w_freq: float, loss_pix: float, w: float) -> float:
    return w * loss_w_freq + (1.0 - w) * loss_pix


@dataclass(frozen=True)
class LossTerms:
    loss_freq: float
    loss_pixel: float
    loss_w_freq: float
    total: float
    omega: float
    n_freq: int
    n_pixel: int


# ---------------------------------------------------------------------------
# optimiser


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0

    @classmethod
    def zeros_like(cls, params: np.ndarray, lr: float = 5e-4, **kw) -> "AdamState":
        if lr <= 0:
            raise ParameterError("learning rate must be positive")
        return cls(np.zeros_like(params), np.zeros_like(params), lr, **kw)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam; returns new arrays and leaves the inputs untouched."""
    if params.shape != grads.shape or params.shape != state.first_moment.shape:
        raise SizeError("parameter, gradient and moment vectors must have equal length")
    if not np.all(np.isfinite(grads)):
        bad = np.flatnonzero(~np.isfinite(grads))
        raise NumericalAbort(f"non-finite gradient in {bad.size} coordinates (first at {bad[0]})")
    step = state.step + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    new = params - (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(params.dtype)
    return new, AdamState(m, v, state.lr, state.beta1, state.beta2, state.eps, step)


# ---------------------------------------------------------------------------
# segment partition


def segment_labels(mask: KLineMask, boundaries=()) -> np.ndarray:
    """Label lines for the Movement INR.

    Unflagged lines share label 0 (reference pose).  Each maximal run of
    flagged lines is a motion segment, further split at any known event
    ``boundaries`` (line indices where a new pose starts).
    """
    bits = mask.bits.astype(bool)
    cuts = set(int(b) for b in boundaries)
    labels = np.zeros(bits.size, dtype=np.int64)
    current = 0
    for i, flagged in enumerate(bits):
        if not flagged:
            continue
        if i == 0 or not bits[i - 1] or i in cuts:
            current += 1
        labels[i] = current
    return labels


# ---------------------------------------------------------------------------
# differentiable objective


@dataclass
class Objective:
    """Forward graph of one iteration; call :meth:`gradient` to run the tape backwards."""

    total: ad.Var
    leaves: dict[str, ad.Var]
    terms: LossTerms
    image: np.ndarray
    poses: np.ndarray
    f_c: np.ndarray

    def gradient(self, params: InrParams) -> np.ndarray:
        ad.backward(self.total)
        return params.flatten_grads(self.leaves)


def build_objective(model: DualINR, params: InrParams, f_o: np.ndarray, mask: KLineMask,
                    labels: np.ndarray, w: float) -> Objective:
    h, wd = f_o.shape
    m = _row_mask(mask, f_o)
    leaves = params.leaves()
    i_d = model.deartifact.forward(leaves, h, wd)
    poses = model.movement.forward(leaves, int(labels.max()) + 1)
    f_m = render_motion_kspace(i_d, poses, labels)
    f_d = ad.real_to_complex_fft(i_d)
    f_c = ad.add(ad.scale(f_d, 1.0 - m), ad.scale(f_m, m))

    emap = ad.abs2(ad.sub(f_c, ad.const(f_o)))
    l_freq = ad.mean(emap)
    l_wfreq = ad.mean(ad.scale(emap, w * m + (1.0 - w) * (1.0 - m)))
    i_c = ad.absolute(ad.ifft(f_c))
    i_o = np.abs(ifft2c(f_o))
    l_pix = ad.mean(ad.abs2(ad.sub(i_c, ad.const(i_o))))
    total = ad.add(ad.scale(l_wfreq, w), ad.scale(l_pix, 1.0 - w))

    terms = LossTerms(float(l_freq.value), float(l_pix.value), float(l_wfreq.value),
                      float(total.value), w, h * wd, h * wd)
    return Objective(total, leaves, terms, i_d.value, np.asarray(poses.value), f_c.value)


# ---------------------------------------------------------------------------
# reconstruction loop


@dataclass(frozen=True)
class ReconConfig:
    epochs: int = 250
    lr: float = 5e-4
    lowpass_fraction: float = 0.125
    mask_mode: str = "oracle"
    seed: int = 0
    dtype: str = "float32"
    divergence_factor: float = 10.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.lr <= 0:
            raise ParameterError("learning rate must be positive")
        if self.mask_mode not in ("oracle", "detector", "external"):
            raise ParameterError(f"unknown mask mode {self.mask_mode!r}")
        if not 0.0 < self.lowpass_fraction <= 1.0:
            raise ParameterError("lowpass fraction must lie in (0, 1]")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    omega: float
    loss_freq: float
    loss_pixel: float
    loss_w_freq: float
    total: float


@dataclass
class ReconResult:
    image: np.ndarray          # Deartifact INR output at the final parameters
    reorganized: np.ndarray    # |ifft2c(f_ic)| of the last epoch
    params: InrParams
    poses: list[RigidTransform2D]
    labels: np.ndarray
    log: list[EpochRecord] = field(default_factory=list)


def schedule_time(k: int, epochs: int) -> float:
    """Map epoch ``k`` in ``[0, epochs)`` onto ``t`` in ``[0, epochs]`` so both ends are hit."""
    return k * epochs / (epochs - 1) if epochs > 1 else 0.0


def reconstruct(f_o: np.ndarray, mask: KLineMask, cfg: ReconConfig = ReconConfig(),
                boundaries=(), model: DualINR | None = None,
                params: InrParams | None = None) -> ReconResult:
    f_o = np.asarray(f_o)
    if f_o.ndim != 2 or len(mask) != f_o.shape[0] or mask.axis != "rows":
        raise SizeError(f"mask ({mask.axis}, {len(mask)} lines) does not match k-space {f_o.shape}")
    model = model or DualINR()
    params = params or model.init_params(cfg.seed, np.dtype(cfg.dtype))
    labels = segment_labels(mask, boundaries)
    state = AdamState.zeros_like(params.values, cfg.lr)
    history: list[EpochRecord] = []
    initial = None
    halved = False
    good = params.copy()

    obj = None
    for k in range(cfg.epochs):
        w = omega(schedule_time(k, cfg.epochs), cfg.epochs)
        obj = build_objective(model, params, f_o, mask, labels, w)
        t = obj.terms
        if not math.isfinite(t.total):
            raise NumericalAbort(f"non-finite loss at epoch {k}", k, good)
        if initial is None:
            initial = t.total
        elif t.total > cfg.divergence_factor * initial:
            if halved:
                raise NumericalAbort(f"loss diverged twice (epoch {k})", k, good)
            halved = True
            state.lr *= 0.5
            log.warning("loss %.3g exceeds %gx initial at epoch %d; halving lr to %g",
                        t.total, cfg.divergence_factor, k, state.lr)
        history.append(EpochRecord(k, w, t.loss_freq, t.loss_pixel, t.loss_w_freq, t.total))
        good = params
        grads = obj.gradient(params)
        try:
            values, state = adam_step(params.values, grads, state)
        except NumericalAbort as exc:
            raise NumericalAbort(str(exc), k, good) from None
        params = InrParams(values, params.layout)

    f_ic = reorganize(obj.f_c, f_o, mask, cfg.lowpass_fraction)
    final_image = model.image(params, *f_o.shape)
    poses = model.poses(params, int(labels.max()) + 1)
    return ReconResult(np.asarray(final_image, dtype=np.float64), np.abs(ifft2c(f_ic)),
                       params, poses, labels, history)
