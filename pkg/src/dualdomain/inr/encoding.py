"""Multiresolution hash-grid encoding of points in [-1, 1]^d."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..autodiff import StateError, Var
from ..grid import ParameterError, SizeError

# XOR-hash primes, one per input dimension
PRIMES = np.array([1, 2654435761, 805459861], dtype=np.uint64)


@dataclass(frozen=True)
class HashGridConfig:
    levels: int = 8
    base_resolution: int = 16
    growth: float = 1.5
    features_per_level: int = 2
    table_size_log2: int = 14
    dims: int = 2

    def __post_init__(self):
        if min(self.levels, self.base_resolution, self.features_per_level,
               self.table_size_log2, self.dims) < 1:
            raise ParameterError("hash grid counts must be >= 1")
        if self.dims > len(PRIMES):
            raise ParameterError(f"at most {len(PRIMES)} input dimensions are supported")
        if self.levels > 1 and self.growth <= 1.0:
            raise ParameterError("growth factor must exceed 1")
        res = self.resolutions
        if any(b <= a for a, b in zip(res, res[1:])):
            raise ParameterError(f"per-level resolutions must increase strictly, got {res}")

    @cached_property
    def resolutions(self) -> tuple[int, ...]:
        return tuple(int(np.floor(self.base_resolution * self.growth ** l)) for l in range(self.levels))

    @property
    def table_size(self) -> int:
        return 1 << self.table_size_log2

    @property
    def output_dim(self) -> int:
        return self.levels * self.features_per_level

    @property
    def table_shape(self) -> tuple[int, int, int]:
        return (self.levels, self.table_size, self.features_per_level)

    def is_dense(self, level: int) -> bool:
        return (self.resolutions[level] + 1) ** self.dims <= self.table_size


@dataclass
class EncodingPlan:
    """Table indices and bilinear weights of the 2^d cell corners, per level.

    Depends only on the query points, so one plan serves every iteration.
    """

    cfg: HashGridConfig
    indices: list[np.ndarray]  # per level, (P, 2^d) int64
    weights: list[np.ndarray]  # per level, (P, 2^d) float64

    @property
    def n_points(self) -> int:
        return self.indices[0].shape[0]


def vertex_index(cfg: HashGridConfig, level: int, vertex: np.ndarray) -> np.ndarray:
    """Table slot of integer grid vertices ``(..., d)`` at ``level``."""
    res = cfg.resolutions[level]
    if cfg.is_dense(level):
        strides = (res + 1) ** np.arange(cfg.dims)
        return (vertex * strides).sum(axis=-1)
    v = vertex.astype(np.uint64)
    h = np.zeros(v.shape[:-1], dtype=np.uint64)
    for i in range(cfg.dims):
        h ^= v[..., i] * PRIMES[i]
    return (h % np.uint64(cfg.table_size)).astype(np.int64)


def make_plan(coords: np.ndarray, cfg: HashGridConfig) -> EncodingPlan:
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != cfg.dims:
        raise SizeError(f"expected coordinates of shape (P, {cfg.dims}), got {coords.shape}")
    u = (np.clip(coords, -1.0, 1.0) + 1.0) * 0.5
    corners = np.array(np.meshgrid(*([[0, 1]] * cfg.dims), indexing="ij")).reshape(cfg.dims, -1).T
    indices, weights = [], []
    for level, res in enumerate(cfg.resolutions):
        pos = u * res
        cell = np.minimum(np.floor(pos), res - 1).astype(np.int64)
        frac = pos - cell
        vert = cell[:, None, :] + corners[None, :, :]  # (P, 2^d, d)
        w = np.prod(np.where(corners[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :]), axis=-1)
        indices.append(vertex_index(cfg, level, vert))
        weights.append(w)
    return EncodingPlan(cfg, indices, weights)


def hash_encode(plan: EncodingPlan, tables: Var) -> Var:
    """Interpolated features ``(P, levels * features_per_level)``, linear in ``tables``."""
    if tables is None or tables.value is None:
        raise StateError("hash tables are not initialised")
    cfg = plan.cfg
    t = tables.value
    if t.shape != cfg.table_shape:
        raise SizeError(f"tables have shape {t.shape}, config expects {cfg.table_shape}")
    parts = []
    for level in range(cfg.levels):
        idx, w = plan.indices[level], plan.weights[level]
        parts.append(np.einsum("pc,pcf->pf", w.astype(t.dtype), t[level][idx]))
    out = np.concatenate(parts, axis=1)

    def bwd(g):
        grad = np.zeros(cfg.table_shape, dtype=t.dtype)
        nf = cfg.features_per_level
        for level in range(cfg.levels):
            idx, w = plan.indices[level].ravel(), plan.weights[level]
            for f in range(nf):
                gf = g[:, level * nf + f]
                grad[level, :, f] = np.bincount(idx, weights=(w * gf[:, None]).ravel(),
                                                minlength=cfg.table_size)
        tables.accumulate(grad)
    return Var(out, (tables,), bwd)
