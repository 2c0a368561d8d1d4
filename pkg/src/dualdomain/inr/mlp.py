"""Fully connected stack: affine + activation per hidden layer, linear output."""
from __future__ import annotations

from dataclasses import dataclass

from .. import autodiff as ad
from ..grid import ParameterError, SizeError

ACTIVATIONS = {"relu": ad.relu, "gelu": ad.gelu}


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    output_dim: int
    hidden_layers: int = 2
    hidden_width: int = 64
    activation: str = "relu"

    def __post_init__(self):
        if min(self.input_dim, self.output_dim, self.hidden_width) < 1 or self.hidden_layers < 0:
            raise ParameterError("MLP widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ParameterError(f"activation must be one of {sorted(ACTIVATIONS)}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        widths = [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]
        return list(zip(widths[:-1], widths[1:]))


def mlp_forward(features: ad.Var, cfg: MlpConfig, layers: list[tuple[ad.Var, ad.Var]]) -> ad.Var:
    """``layers`` holds one ``(weight (in, out), bias (out,))`` pair per affine layer."""
    if features.shape[-1] != cfg.input_dim:
        raise SizeError(f"feature dim {features.shape[-1]} != MLP input dim {cfg.input_dim}")
    act = ACTIVATIONS[cfg.activation]
    h = features
    for i, (w, b) in enumerate(layers):
        h = ad.add(ad.matmul(h, w), b)
        if i < len(layers) - 1:
            h = act(h)
    return h
