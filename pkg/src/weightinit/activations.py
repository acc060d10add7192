"""Activation functions and the local data the linearized theory needs.

Each activation is described by an :class:`ActivationSpec` carrying the
elementwise evaluator together with g(0) and g'(0).  ReLU has no derivative
at the origin, so its ``deriv_at_zero`` is ``None``; the propagation code uses
that to route ReLU to its exact engine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import NumericDomainError, UnknownActivationError

DEFAULT_STEP = 1e-5

BUILTIN_NAMES = ("identity", "tanh", "sigmoid", "relu")


def _identity(x):
    return np.asarray(x, dtype=float) * 1.0


def _sigmoid(x):
    # expit is overflow-safe for large |x|
    from scipy.special import expit

    return expit(x)


def _relu(x):
    return np.maximum(x, 0.0)


@dataclass(frozen=True)
class ActivationSpec:
    name: str
    value_at_zero: float
    deriv_at_zero: float | None
    evaluator: Callable = _identity

    @property
    def differentiable_at_zero(self) -> bool:
        return self.deriv_at_zero is not None

    @property
    def is_relu(self) -> bool:
        return self.name == "relu"

    def __call__(self, x):
        """Evaluate elementwise; scalars in, float out."""
        out = self.evaluator(x)
        if np.ndim(out) == 0:
            return float(out)
        return out


_BUILTINS = {
    "identity": lambda: ActivationSpec("identity", 0.0, 1.0, _identity),
    "tanh": lambda: ActivationSpec("tanh", 0.0, 1.0, np.tanh),
    "sigmoid": lambda: ActivationSpec("sigmoid", 0.5, 0.25, _sigmoid),
    "relu": lambda: ActivationSpec("relu", 0.0, None, _relu),
}


def builtin(name: str) -> ActivationSpec:
    """Return the built-in activation called ``name``."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownActivationError(
            f"unknown activation {name!r}; expected one of {', '.join(BUILTIN_NAMES)}"
        ) from None
    return factory()


def central_difference(fn: Callable, step: float = DEFAULT_STEP, at: float = 0.0) -> float:
    return (float(fn(at + step)) - float(fn(at - step))) / (2.0 * step)


def custom(evaluator: Callable, step: float = DEFAULT_STEP, name: str = "custom") -> ActivationSpec:
    """Wrap an arbitrary activation, estimating g'(0) by central difference.

    Raises :class:`NumericDomainError` if the function is not finite at
    ``0`` or at ``±step``.
    """
    if not step > 0:
        raise NumericDomainError(f"step must be positive, got {step}")
    try:
        probes = [float(evaluator(x)) for x in (-step, 0.0, step)]
    except (ArithmeticError, ValueError) as exc:
        raise NumericDomainError(f"activation cannot be evaluated near 0: {exc}") from exc
    if not all(math.isfinite(p) for p in probes):
        raise NumericDomainError(f"activation is not finite near 0: {probes}")
    lo, g0, hi = probes
    return ActivationSpec(name, g0, (hi - lo) / (2.0 * step), evaluator)


def from_samples(samples, name: str = "custom", step: float = DEFAULT_STEP) -> ActivationSpec:
    """Build a piecewise-linear activation from ``[[x, g(x)], ...]`` pairs.

    Values outside the sampled range are held at the end values.
    """
    table = np.asarray(samples, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise NumericDomainError("samples must be a list of at least two [x, g(x)] pairs")
    if not np.all(np.isfinite(table)):
        raise NumericDomainError("samples contain non-finite values")
    order = np.argsort(table[:, 0], kind="stable")
    xs, ys = table[order, 0], table[order, 1]
    if np.any(np.diff(xs) <= 0):
        raise NumericDomainError("sample abscissae must be distinct")

    def evaluator(x):
        return np.interp(x, xs, ys)

    return custom(evaluator, step=step, name=name)


def load_custom(path) -> ActivationSpec:
    """Load a custom activation file: ``{"name": ..., "samples": [[x, g], ...]}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "samples" not in doc:
        raise NumericDomainError(f"{path}: expected a JSON object with a 'samples' list")
    return from_samples(doc["samples"], name=str(doc.get("name", "custom")))


def resolve(name_or_path: str) -> ActivationSpec:
    """Built-in name, or a path to a custom activation JSON file."""
    if name_or_path in _BUILTINS:
        return builtin(name_or_path)
    if name_or_path.endswith(".json") or Path(name_or_path).is_file():
        return load_custom(name_or_path)
    return builtin(name_or_path)
