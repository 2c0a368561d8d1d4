"""Parameter storage and the two coordinate networks.

``DeartifactINR`` maps pixel-center coordinates to intensities (the
artifact-free image).  ``MovementINR`` maps a 1D segment coordinate to one
rigid pose per motion segment.  Both read their weights from a single flat
:class:`InrParams` vector so the optimiser sees one array.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..grid import ParameterError, SizeError
from ..motion import RigidTransform2D
from ..phantom import pixel_centers
from .encoding import EncodingPlan, HashGridConfig, hash_encode, make_plan
from .mlp import MlpConfig, mlp_forward


@dataclass(frozen=True)
class DeartifactConfig:
    grid: HashGridConfig = field(default_factory=HashGridConfig)
    hidden_layers: int = 2
    hidden_width: int = 64
    activation: str = "relu"
    clamp: tuple[float, float] = (0.0, 1.5)
    output_bias: float = 0.5

    @property
    def mlp(self) -> MlpConfig:
        return MlpConfig(self.grid.output_dim, 1, self.hidden_layers, self.hidden_width, self.activation)


@dataclass(frozen=True)
class MovementConfig:
    grid: HashGridConfig = field(default_factory=lambda: HashGridConfig(
        levels=4, base_resolution=4, growth=2.0, features_per_level=2, table_size_log2=6, dims=1))
    hidden_layers: int = 1
    hidden_width: int = 32
    activation: str = "relu"
    max_rotation: float = float(np.deg2rad(10.0))
    max_translation: float = 10.0
    gain: float = 1.0

    def __post_init__(self):
        if self.grid.dims != 1:
            raise ParameterError("the movement network uses a 1D grid over segment index")

    @property
    def mlp(self) -> MlpConfig:
        return MlpConfig(self.grid.output_dim, 3, self.hidden_layers, self.hidden_width, self.activation)


def _blocks(prefix: str, grid: HashGridConfig, mlp: MlpConfig):
    yield f"{prefix}.tables", grid.table_shape
    for i, (a, b) in enumerate(mlp.layer_dims):
        yield f"{prefix}.mlp.{i}.weight", (a, b)
        yield f"{prefix}.mlp.{i}.bias", (b,)


@dataclass(frozen=True)
class Layout:
    """Named blocks of the flat parameter vector: ``name -> (offset, shape)``."""

    blocks: dict[str, tuple[int, tuple[int, ...]]]
    size: int

    @classmethod
    def from_shapes(cls, shapes) -> "Layout":
        blocks, off = {}, 0
        for name, shape in shapes:
            blocks[name] = (off, tuple(shape))
            off += int(np.prod(shape))
        return cls(blocks, off)

    def slice(self, name: str) -> slice:
        off, shape = self.blocks[name]
        return slice(off, off + int(np.prod(shape)))

    def to_json(self) -> dict:
        return {"size": self.size,
                "blocks": [{"name": k, "offset": o, "shape": list(s)} for k, (o, s) in self.blocks.items()]}

    @classmethod
    def from_json(cls, d: dict) -> "Layout":
        return cls({b["name"]: (int(b["offset"]), tuple(b["shape"])) for b in d["blocks"]}, int(d["size"]))


@dataclass
class InrParams:
    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        if self.values.ndim != 1 or self.values.size != self.layout.size:
            raise SizeError(f"parameter vector has {self.values.size} entries, layout needs {self.layout.size}")

    def block(self, name: str) -> np.ndarray:
        return self.values[self.layout.slice(name)].reshape(self.layout.blocks[name][1])

    def leaves(self) -> dict[str, ad.Var]:
        return {name: ad.leaf(self.block(name)) for name in self.layout.blocks}

    def flatten_grads(self, leaves: dict[str, ad.Var]) -> np.ndarray:
        """Collect leaf gradients into a vector aligned with ``values``."""
        g = np.zeros_like(self.values)
        for name, var in leaves.items():
            if var.grad is not None:
                g[self.layout.slice(name)] = np.ravel(var.grad)
        return g

    def copy(self) -> "InrParams":
        return InrParams(self.values.copy(), self.layout)


class DeartifactINR:
    prefix = "deartifact"

    def __init__(self, cfg: DeartifactConfig | None = None):
        self.cfg = cfg or DeartifactConfig()
        self._plans: dict[tuple[int, int], EncodingPlan] = {}

    def shapes(self):
        return list(_blocks(self.prefix, self.cfg.grid, self.cfg.mlp))

    def plan(self, height: int, width: int) -> EncodingPlan:
        key = (height, width)
        if key not in self._plans:
            yy, xx = np.meshgrid(pixel_centers(height), pixel_centers(width), indexing="ij")
            self._plans[key] = make_plan(np.stack([xx.ravel(), yy.ravel()], axis=1), self.cfg.grid)
        return self._plans[key]

    def layers(self, leaves):
        p = self.prefix
        return [(leaves[f"{p}.mlp.{i}.weight"], leaves[f"{p}.mlp.{i}.bias"])
                for i in range(len(self.cfg.mlp.layer_dims))]

    def forward(self, leaves: dict[str, ad.Var], height: int, width: int) -> ad.Var:
        feats = hash_encode(self.plan(height, width), leaves[f"{self.prefix}.tables"])
        out = mlp_forward(feats, self.cfg.mlp, self.layers(leaves))
        img = ad.reshape(out, (height, width))
        return ad.clamp(img, *self.cfg.clamp)


class MovementINR:
    prefix = "movement"

    def __init__(self, cfg: MovementConfig | None = None):
        self.cfg = cfg or MovementConfig()

    def shapes(self):
        return list(_blocks(self.prefix, self.cfg.grid, self.cfg.mlp))

    def layers(self, leaves):
        p = self.prefix
        return [(leaves[f"{p}.mlp.{i}.weight"], leaves[f"{p}.mlp.{i}.bias"])
                for i in range(len(self.cfg.mlp.layer_dims))]

    def forward(self, leaves: dict[str, ad.Var], segment_count: int) -> ad.Var:
        """``(segment_count, 3)`` poses as ``(theta, tx, ty)``; row 0 is pinned to zero."""
        if segment_count < 1:
            raise ParameterError("segment_count must be >= 1")
        u = (np.arange(segment_count) + 0.5) / segment_count
        plan = make_plan((2.0 * u - 1.0)[:, None], self.cfg.grid)
        feats = hash_encode(plan, leaves[f"{self.prefix}.tables"])
        raw = mlp_forward(feats, self.cfg.mlp, self.layers(leaves))
        bounds = np.array([self.cfg.max_rotation, self.cfg.max_translation, self.cfg.max_translation])
        pin = np.ones((segment_count, 1))
        pin[0] = 0.0
        return ad.scale(ad.tanh(ad.scale(raw, self.cfg.gain)), bounds[None, :] * pin)


@dataclass
class DualINR:
    """The Deartifact and Movement networks sharing one parameter vector."""

    deartifact: DeartifactINR = field(default_factory=DeartifactINR)
    movement: MovementINR = field(default_factory=MovementINR)

    @property
    def layout(self) -> Layout:
        return Layout.from_shapes(self.deartifact.shapes() + self.movement.shapes())

    def init_params(self, seed: int = 0, dtype=np.float32) -> InrParams:
        """Tables ~ U(-1e-4, 1e-4); weights ~ U(+-1/sqrt(fan_in)); zero biases except the image offset."""
        rng = np.random.Generator(np.random.Philox(seed))
        layout = self.layout
        values = np.zeros(layout.size, dtype=np.float64)
        for name, (off, shape) in layout.blocks.items():
            sl = layout.slice(name)
            if name.endswith(".tables"):
                values[sl] = rng.uniform(-1e-4, 1e-4, size=sl.stop - sl.start)
            elif name.endswith(".weight"):
                bound = 1.0 / np.sqrt(shape[0])
                values[sl] = rng.uniform(-bound, bound, size=sl.stop - sl.start)
        last = len(self.deartifact.cfg.mlp.layer_dims) - 1
        values[layout.slice(f"deartifact.mlp.{last}.bias")] = self.deartifact.cfg.output_bias
        return InrParams(values.astype(dtype), layout)

    def image(self, params: InrParams, height: int, width: int) -> np.ndarray:
        return self.deartifact.forward(params.leaves(), height, width).value

    def poses(self, params: InrParams, segment_count: int) -> list[RigidTransform2D]:
        vals = self.movement.forward(params.leaves(), segment_count).value
        return [RigidTransform2D(float(a), float(b), float(c)) for a, b, c in vals]
