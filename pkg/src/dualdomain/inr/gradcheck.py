"""Central finite-difference check of analytic gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ContractError(RuntimeError):
    """The loss closure broke its contract (e.g. it is not deterministic)."""


@dataclass(frozen=True)
class GradcheckReport:
    coords: np.ndarray
    analytic: np.ndarray
    numeric: np.ndarray
    rel_err: np.ndarray
    tolerance: float

    @property
    def max_rel(self) -> float:
        return float(self.rel_err.max())

    @property
    def mean_rel(self) -> float:
        return float(self.rel_err.mean())

    @property
    def passed(self) -> bool:
        return self.max_rel <= self.tolerance


def relative_error(a: np.ndarray, n: np.ndarray, floor: float) -> np.ndarray:
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def gradcheck(values: np.ndarray,
              closure: Callable[[np.ndarray], tuple[float, np.ndarray]],
              step: float = 1e-6, tolerance: float = 1e-5, n_coords: int = 64, seed: int = 0,
              oracle: Callable[[np.ndarray], float] | None = None,
              floor: float | None = None) -> GradcheckReport:
    """Compare ``closure``'s gradient with central differences on sampled coordinates.

    ``closure(values) -> (loss, grad)``.  The difference quotient uses
    ``oracle(values) -> loss`` when given, which lets a single-precision
    gradient be judged against a double-precision evaluation of the same loss.
    ``floor`` keeps the relative error finite where both gradients vanish;
    it defaults to ``1e-6 * max|grad|`` over the sampled coordinates.
    """
    values = np.asarray(values)
    loss0, grad = closure(values.copy())
    loss1, grad1 = closure(values.copy())
    if loss0 != loss1 or not np.array_equal(grad, grad1):
        raise ContractError("two forward passes with the same parameters disagree")
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != values.shape:
        raise ContractError(f"gradient shape {grad.shape} != parameter shape {values.shape}")

    rng = np.random.Generator(np.random.Philox(seed))
    n = min(n_coords, values.size)
    coords = np.sort(rng.choice(values.size, size=n, replace=False))

    if oracle is None:
        base = values

        def oracle(v):
            return closure(v)[0]
    else:
        base = values.astype(np.float64)
    numeric = np.empty(n)
    for j, c in enumerate(coords):
        plus = base.copy()
        minus = base.copy()
        plus[c] += step
        minus[c] -= step
        numeric[j] = (float(oracle(plus)) - float(oracle(minus))) / (2.0 * step)

    analytic = grad[coords]
    if floor is None:
        floor = max(1e-6 * float(np.max(np.abs(analytic))), np.finfo(np.float64).tiny)
    return GradcheckReport(coords, analytic, numeric, relative_error(analytic, numeric, floor), tolerance)
