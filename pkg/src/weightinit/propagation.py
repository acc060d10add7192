"""Layer-to-layer moment propagation and the initialization solver.

Notation used throughout: layer ``m`` receives inputs ``x_m`` with mean
``mu_m`` and variance ``s_m^2``; its pre-activations ``y_m = W_m x_m`` have
mean 0 and variance ``u_m^2 = N v^2 (s_m^2 + mu_m^2)``; the next layer's
inputs are ``x_{m+1} = g(y_m)``.  Layer 1 holds the raw network inputs.

Three engines map ``(mu_m, s_m^2)`` to ``(mu_{m+1}, s_{m+1}^2)``:

``linearized``
    First-order Taylor expansion of g at 0.  Needs g'(0).
``relu_exact``
    Closed-form moments of a rectified zero-mean Gaussian.
``quadrature``
    E[g(u Z)] and E[g(u Z)^2] by Gauss quadrature, no Taylor truncation.
    Used as the oracle for the other two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .activations import ActivationSpec
from .errors import (
    DegenerateActivationError,
    NumericDomainError,
    NumericOverflowError,
    WrongEngineError,
)
from .quadrature import DEFAULT_NODES, MIN_NODES, gaussian_moments

TWO_PI = 2.0 * math.pi
# E[relu(uZ)]^2 / u^2 and Var[relu(uZ)] / u^2
RELU_MEAN_SQ_COEF = 1.0 / TWO_PI
RELU_VAR_COEF = 0.5 - 1.0 / TWO_PI

ENGINES = ("linearized", "relu_exact", "quadrature")


@dataclass(frozen=True)
class LayerMoments:
    layer_index: int
    mean: float
    variance: float
    preact_mean: float = 0.0
    preact_variance: float = math.nan

    @property
    def second_moment(self) -> float:
        return self.variance + self.mean**2


def initial_state(mean: float = 0.0, variance: float = 1.0) -> LayerMoments:
    """Moments of the raw network inputs (layer 1)."""
    if variance < 0:
        raise NumericDomainError("variance must be non-negative")
    return LayerMoments(1, float(mean), float(variance))


@dataclass(frozen=True)
class NetworkConfig:
    width: int
    depth: int
    weight_variance: float
    activation: ActivationSpec

    def __post_init__(self):
        if self.width < 1:
            raise NumericDomainError(f"width must be >= 1, got {self.width}")
        if self.depth < 1:
            raise NumericDomainError(f"depth must be >= 1, got {self.depth}")
        if not self.weight_variance > 0:
            raise NumericDomainError(f"weight_variance must be > 0, got {self.weight_variance}")

    @property
    def gain(self) -> float:
        """N v^2, the only way width and weight variance enter the recursion."""
        return self.width * self.weight_variance

    def preact_variance(self, state: LayerMoments) -> float:
        return self.gain * state.second_moment


@dataclass(frozen=True)
class InitRecommendation:
    weight_variance: float
    weight_stddev: float
    engine: str
    derivation: dict = field(default_factory=dict)


def recommend_init(activation: ActivationSpec, width: int) -> InitRecommendation:
    """Weight variance that keeps the input variance at 1 from layer to layer.

    Differentiable activations use ``v^2 = 1 / (N g'(0)^2 (1 + g(0)^2))``.
    For ReLU the pre-activation variance must satisfy ``u^2 (1/2 - 1/(2 pi)) = 1``
    and the input mean settles at ``mu^2 = u^2 / (2 pi)``; substituting into
    ``u^2 = N v^2 (1 + mu^2)`` gives ``v^2 = 2 / N`` exactly.  The rounded
    constants 0.34 and 0.7 are never used.
    """
    if width < 1:
        raise NumericDomainError(f"width must be >= 1, got {width}")
    if activation.is_relu:
        u_sq = 1.0 / RELU_VAR_COEF
        mean_sq = u_sq * RELU_MEAN_SQ_COEF
        v_sq = u_sq / (width * (1.0 + mean_sq))
        derivation = {"preact_variance_target": u_sq, "mean_estimate": math.sqrt(mean_sq), "width": width}
        engine = "relu_exact"
    else:
        if activation.deriv_at_zero is None:
            raise WrongEngineError(f"{activation.name} has no derivative at 0 and no exact engine")
        g0, dg0 = activation.value_at_zero, activation.deriv_at_zero
        if dg0 == 0:
            raise DegenerateActivationError(f"{activation.name} has g'(0) = 0; weight variance would be infinite")
        v_sq = 1.0 / (width * dg0**2 * (1.0 + g0**2))
        derivation = {"g0": g0, "g0_prime": dg0, "width": width}
        engine = "linearized"
    return InitRecommendation(v_sq, math.sqrt(v_sq), engine, derivation)


def _next_state(state, config, mean, variance):
    nxt = LayerMoments(state.layer_index + 1, mean, variance)
    return replace(nxt, preact_variance=config.preact_variance(nxt))


def linearized_step(state: LayerMoments, config: NetworkConfig) -> LayerMoments:
    act = config.activation
    if act.deriv_at_zero is None:
        raise WrongEngineError(f"linearized engine needs g'(0); {act.name} is not differentiable at 0")
    u_sq = config.preact_variance(state)
    return _next_state(state, config, act.value_at_zero, act.deriv_at_zero**2 * u_sq)


def relu_step(state: LayerMoments, config: NetworkConfig) -> LayerMoments:
    if not config.activation.is_relu:
        raise WrongEngineError(f"relu_exact engine only handles relu, got {config.activation.name}")
    u_sq = config.preact_variance(state)
    return _next_state(state, config, math.sqrt(u_sq / TWO_PI), RELU_VAR_COEF * u_sq)


def quadrature_step(state: LayerMoments, config: NetworkConfig, nodes: int = DEFAULT_NODES) -> LayerMoments:
    if nodes < MIN_NODES:
        raise NumericDomainError(f"quadrature needs at least {MIN_NODES} nodes, got {nodes}")
    u_sq = config.preact_variance(state)
    mean, second = gaussian_moments(config.activation.evaluator, math.sqrt(u_sq), nodes)
    if not (math.isfinite(mean) and math.isfinite(second)):
        raise NumericDomainError(f"quadrature diverged at layer {state.layer_index} (u^2 = {u_sq})")
    # rounding can leave a tiny negative variance for near-constant outputs
    return _next_state(state, config, mean, max(second - mean * mean, 0.0))


def default_engine(activation: ActivationSpec) -> str:
    return "relu_exact" if activation.is_relu else "linearized"


def _stepper(engine, config, nodes):
    if engine == "linearized":
        return lambda s: linearized_step(s, config)
    if engine == "relu_exact":
        return lambda s: relu_step(s, config)
    if engine == "quadrature":
        return lambda s: quadrature_step(s, config, nodes)
    raise WrongEngineError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def propagate(
    initial: LayerMoments,
    config: NetworkConfig,
    engine: str | None = None,
    nodes: int = DEFAULT_NODES,
) -> list[LayerMoments]:
    """Moments of the inputs to layers 1..depth.

    Entry ``m`` (1-based) results from ``m - 1`` steps; entry 1 is
    ``initial`` with its pre-activation variance filled in.
    """
    if initial.layer_index != 1:
        raise NumericDomainError("initial state must be layer 1")
    engine = engine or default_engine(config.activation)
    if engine == "quadrature" and nodes < MIN_NODES:
        raise NumericDomainError(f"quadrature needs at least {MIN_NODES} nodes, got {nodes}")
    step = _stepper(engine, config, nodes)
    # fail on incompatible engine before doing any work
    if engine == "linearized" and config.activation.deriv_at_zero is None:
        raise WrongEngineError(f"linearized engine needs g'(0); {config.activation.name} is not differentiable at 0")
    if engine == "relu_exact" and not config.activation.is_relu:
        raise WrongEngineError(f"relu_exact engine only handles relu, got {config.activation.name}")

    states = [replace(initial, preact_mean=0.0, preact_variance=config.preact_variance(initial))]
    for _ in range(config.depth - 1):
        try:
            nxt = step(states[-1])
        except NumericDomainError as exc:
            layer = states[-1].layer_index + 1
            raise NumericOverflowError(f"layer {layer}: {exc}", layer) from exc
        if not all(math.isfinite(v) for v in (nxt.mean, nxt.variance, nxt.preact_variance)):
            raise NumericOverflowError(f"moments became non-finite at layer {nxt.layer_index}", nxt.layer_index)
        states.append(nxt)
    return states


def relu_decay_closed_form(m: int) -> tuple[float, float]:
    """(mu^2, s^2) after ``m`` ReLU layers with N v^2 = 1 from inputs (0, 1).

    Each layer multiplies the second moment by 1/2, split as 1/(2 pi) into the
    squared mean and 1/2 - 1/(2 pi) into the variance, so the values are
    ``(1/(2 pi)) 2^-(m-1)`` and ``(1/2 - 1/(2 pi)) 2^-(m-1)``.  In
    :func:`propagate` indexing these are the moments of entry ``m + 1``.
    """
    if m < 1:
        raise NumericDomainError(f"closed form needs m >= 1, got {m}")
    decay = 0.5 ** (m - 1)
    return RELU_MEAN_SQ_COEF * decay, RELU_VAR_COEF * decay
