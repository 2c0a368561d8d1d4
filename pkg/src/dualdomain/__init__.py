"""Dual-domain implicit-neural-representation removal of rigid-motion MRI artifacts."""
from .ddo import NumericalAbort, ReconConfig, ReconResult, compose_fc, omega, reconstruct, reorganize
from .detect import column_rule, detect_mask, line_precision_recall, score_lines
from .grid import KLineMask, ParameterError, SizeError
from .metrics import MetricReport, evaluate, haarpsi, psnr, ssim, vif
from .motion import HEAVY, LIGHT, MotionTrace, RigidTransform2D, SeverityPreset, corrupt, sample_motion
from .phantom import generate_phantom, shepp_logan
from .spectral import fft2c, ifft2c, lowpass_window, split_low_high

__version__ = "0.1.0"

__all__ = [
    "NumericalAbort", "ReconConfig", "ReconResult", "compose_fc", "omega", "reconstruct", "reorganize",
    "column_rule", "detect_mask", "line_precision_recall", "score_lines",
    "KLineMask", "ParameterError", "SizeError",
    "MetricReport", "evaluate", "haarpsi", "psnr", "ssim", "vif",
    "HEAVY", "LIGHT", "MotionTrace", "RigidTransform2D", "SeverityPreset", "corrupt", "sample_motion",
    "generate_phantom", "shepp_logan", "fft2c", "ifft2c", "lowpass_window", "split_low_high",
]
