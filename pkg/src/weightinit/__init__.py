"""Activation-aware weight initialization and forward-pass moment propagation."""

__version__ = "0.1.0"

from .activations import ActivationSpec, builtin, custom
from .density import DensityCurve, curve, saturation_fraction, tanh_pdf
from .propagation import (
    InitRecommendation,
    LayerMoments,
    NetworkConfig,
    initial_state,
    linearized_step,
    propagate,
    quadrature_step,
    recommend_init,
    relu_decay_closed_form,
    relu_step,
)
from .simulator import SimConfig, SimReport, WeightDistribution, normality_diagnostics, run

__all__ = [
    "ActivationSpec",
    "DensityCurve",
    "InitRecommendation",
    "LayerMoments",
    "NetworkConfig",
    "SimConfig",
    "SimReport",
    "WeightDistribution",
    "builtin",
    "curve",
    "custom",
    "initial_state",
    "linearized_step",
    "normality_diagnostics",
    "propagate",
    "quadrature_step",
    "recommend_init",
    "relu_decay_closed_form",
    "relu_step",
    "run",
    "saturation_fraction",
    "tanh_pdf",
]
