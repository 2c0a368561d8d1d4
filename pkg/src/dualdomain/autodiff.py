"""A small array-level reverse-mode differentiation engine.

Every :class:`Var` produced by an operation remembers its parents and a
closure that pushes its gradient back to them; the graph reachable from the
loss is the recorded tape.  Complex values carry gradients in the convention
``dL/dRe(z) + 1j * dL/dIm(z)``, so the adjoint of a linear map ``A`` is
``A^H`` and the adjoint of the unitary ``fft2c`` is ``ifft2c``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import erf

from .spectral import fft2c, ifft2c


class StateError(RuntimeError):
    """Operation attempted in the wrong state (no tape, uninitialised parameters)."""


class Var:
    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad")

    def __init__(self, value, parents=(), backward=None, requires_grad=None):
        self.value = value
        self.grad = None
        self.parents = tuple(parents)
        self._backward = backward
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p in self.parents)
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return np.shape(self.value)

    def accumulate(self, g):
        if not self.requires_grad:
            return
        self.grad = g if self.grad is None else self.grad + g

    def __repr__(self):
        return f"Var(shape={self.shape}, requires_grad={self.requires_grad})"


def leaf(value) -> Var:
    """A differentiable input (parameter block)."""
    return Var(value, requires_grad=True)


def const(value) -> Var:
    return Var(value, requires_grad=False)


def _topo(root: Var) -> list[Var]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(root: Var, seed=1.0) -> None:
    """Propagate ``seed`` (dL/droot) through the recorded graph into leaf ``.grad``."""
    if not root.requires_grad:
        raise StateError("nothing to differentiate: the output was not recorded from parameters")
    order = _topo(root)
    for node in order:
        if node.parents:
            node.grad = None
    root.grad = np.asarray(seed, dtype=np.result_type(np.asarray(root.value).dtype, np.float64))
    if np.shape(root.grad) != root.shape:
        root.grad = np.broadcast_to(root.grad, root.shape).copy()
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    for node in order:
        if node.parents:
            node.grad = None


# ---------------------------------------------------------------------------
# elementary operations


def add(a: Var, b: Var) -> Var:
    def bwd(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(g, b.shape))
    return Var(a.value + b.value, (a, b), bwd)


def sub(a: Var, b: Var) -> Var:
    def bwd(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(-g, b.shape))
    return Var(a.value - b.value, (a, b), bwd)


def scale(a: Var, c) -> Var:
    """Multiply by a constant (real or complex, scalar or array)."""
    def bwd(g):
        a.accumulate(_unbroadcast(_real_if(np.conj(c) * g, a.value), a.shape))
    return Var(a.value * c, (a,), bwd)


def mul(a: Var, b: Var) -> Var:
    def bwd(g):
        a.accumulate(_unbroadcast(_real_if(np.conj(b.value) * g, a.value), a.shape))
        b.accumulate(_unbroadcast(_real_if(np.conj(a.value) * g, b.value), b.shape))
    return Var(a.value * b.value, (a, b), bwd)


def matmul(a: Var, w: Var) -> Var:
    def bwd(g):
        a.accumulate(g @ w.value.T)
        w.accumulate(a.value.T @ g)
    return Var(a.value @ w.value, (a, w), bwd)


def relu(a: Var) -> Var:
    on = a.value > 0

    def bwd(g):
        a.accumulate(g * on)
    return Var(a.value * on, (a,), bwd)


_SQRT1_2 = np.sqrt(0.5)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(a: Var) -> Var:
    x = a.value
    cdf = 0.5 * (1.0 + erf(x * _SQRT1_2))

    def bwd(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        a.accumulate(g * (cdf + x * pdf))
    return Var((x * cdf).astype(x.dtype, copy=False), (a,), bwd)


def tanh(a: Var) -> Var:
    t = np.tanh(a.value)

    def bwd(g):
        a.accumulate(g * (1.0 - t * t))
    return Var(t, (a,), bwd)


def clamp(a: Var, lo: float, hi: float) -> Var:
    """Clip to ``[lo, hi]``; the gradient is zero where clipping is active."""
    inside = (a.value >= lo) & (a.value <= hi)

    def bwd(g):
        a.accumulate(g * inside)
    return Var(np.clip(a.value, lo, hi), (a,), bwd)


def reshape(a: Var, shape) -> Var:
    def bwd(g):
        a.accumulate(np.reshape(g, a.shape))
    return Var(np.reshape(a.value, shape), (a,), bwd)


def take_rows(a: Var, rows) -> Var:
    def bwd(g):
        full = np.zeros(a.shape, dtype=g.dtype)
        np.add.at(full, rows, g)
        a.accumulate(full)
    return Var(a.value[rows], (a,), bwd)


def real_to_complex_fft(a: Var) -> Var:
    """``fft2c`` of a real or complex grid."""
    is_real = not np.iscomplexobj(a.value)

    def bwd(g):
        gi = ifft2c(g)
        a.accumulate(gi.real if is_real else gi)
    return Var(fft2c(a.value), (a,), bwd)


def ifft(a: Var) -> Var:
    def bwd(g):
        a.accumulate(fft2c(g))
    return Var(ifft2c(a.value), (a,), bwd)


def absolute(a: Var) -> Var:
    """Complex modulus; the gradient at exactly zero is taken as zero."""
    mag = np.abs(a.value)

    def bwd(g):
        safe = np.where(mag > 0, mag, 1.0)
        a.accumulate(np.where(mag > 0, g * a.value / safe, 0.0))
    return Var(mag, (a,), bwd)


def mean(a: Var) -> Var:
    n = np.size(a.value)

    def bwd(g):
        a.accumulate(np.full(a.shape, g / n))
    return Var(np.mean(a.value), (a,), bwd)


def abs2(a: Var) -> Var:
    """Squared modulus ``|z|^2`` (real output)."""
    def bwd(g):
        a.accumulate(_real_if(2.0 * g * a.value, a.value))
    return Var((a.value.real ** 2 + a.value.imag ** 2) if np.iscomplexobj(a.value)
               else a.value ** 2, (a,), bwd)


def _real_if(g, like):
    return g if np.iscomplexobj(like) else np.real(g)


def _unbroadcast(g, shape):
    if np.shape(g) == tuple(shape):
        return g
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g
