"""Differentiable rendering of motion-corrupted k-space from an image and poses."""
from __future__ import annotations

import numpy as np

from ..autodiff import Var
from ..grid import SizeError
from ..motion import rotate, rotate_adjoint, rotate_dtheta, rotation_plan, shift_ramp
from ..spectral import fft2c, ifft2c


def render_motion_kspace(image: Var, poses: Var, labels: np.ndarray) -> Var:
    """Rows labelled ``s`` are taken from the k-space of ``image`` under ``poses[s]``.

    Label 0 is the reference segment and always uses the untransformed image.
    Gradients flow to the image (adjoint rotation and transform) and to every
    pose (phase-ramp derivative for shifts, sampling-position derivative for
    the rotation).
    """
    img = image.value
    labels = np.asarray(labels)
    h, w = img.shape
    if labels.shape != (h,):
        raise SizeError(f"line partition of length {labels.size} does not cover {h} rows")
    pose_vals = np.asarray(poses.value, dtype=np.float64)
    if labels.max(initial=0) >= pose_vals.shape[0]:
        raise SizeError(f"partition uses {labels.max() + 1} segments, only {pose_vals.shape[0]} poses")

    out_dtype = np.result_type(img.dtype, np.complex64)
    out = fft2c(img).astype(out_dtype, copy=False)
    cache = []
    for s in np.unique(labels):
        if s == 0:
            continue
        rows = labels == s
        theta, tx, ty = pose_vals[s]
        plan = rotation_plan((h, w), theta)
        rot_k = fft2c(rotate(img, theta, plan))
        ramp, dtx, dty = shift_ramp((h, w), tx, ty)
        out[rows] = (rot_k * ramp)[rows]
        cache.append((s, rows, plan, rot_k, ramp, dtx, dty))

    def bwd(g):
        g_img = np.zeros((h, w))
        g_pose = np.zeros_like(pose_vals)
        ref = np.zeros_like(g)
        ref[labels == 0] = g[labels == 0]
        g_img += ifft2c(ref).real
        for s, rows, plan, rot_k, ramp, dtx, dty in cache:
            gs = np.zeros_like(g)
            gs[rows] = g[rows]
            g_pose[s, 1] = np.sum((np.conj(gs) * rot_k * dtx).real)
            g_pose[s, 2] = np.sum((np.conj(gs) * rot_k * dty).real)
            g_rot = ifft2c(np.conj(ramp) * gs).real
            g_pose[s, 0] = np.sum(g_rot * rotate_dtheta(img, plan))
            g_img += rotate_adjoint(g_rot, plan)
        image.accumulate(g_img.astype(img.dtype, copy=False))
        poses.accumulate(g_pose.astype(np.asarray(poses.value).dtype, copy=False))

    return Var(out, (image, poses), bwd)


def render_numpy(img: np.ndarray, poses, labels) -> np.ndarray:
    """Plain-array convenience wrapper; ``poses`` is a list of RigidTransform2D."""
    arr = np.array([[p.theta, p.tx, p.ty] for p in poses], dtype=np.float64)
    return render_motion_kspace(Var(np.asarray(img), requires_grad=False),
                                Var(arr, requires_grad=False), labels).value
