"""Coordinate networks: hash-grid encoding, MLP heads, k-space rendering."""
from .encoding import HashGridConfig, hash_encode, make_plan
from .gradcheck import ContractError, GradcheckReport, gradcheck
from .mlp import MlpConfig, mlp_forward
from .model import (DeartifactConfig, DeartifactINR, DualINR, InrParams, Layout,
                    MovementConfig, MovementINR)
from .render import render_motion_kspace, render_numpy

__all__ = [
    "HashGridConfig", "hash_encode", "make_plan", "ContractError", "GradcheckReport", "gradcheck",
    "MlpConfig", "mlp_forward", "DeartifactConfig", "DeartifactINR", "DualINR", "InrParams",
    "Layout", "MovementConfig", "MovementINR", "render_motion_kspace", "render_numpy",
]
