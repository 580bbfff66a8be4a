"""Fairness surrogate functions.

A surrogate replaces the indicator 1[d > 0] inside the demographic-parity
estimate so that the fairness term becomes differentiable in the model
parameters. Every evaluator here is vectorized over numpy arrays.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DomainError, NotDifferentiableError

logger = logging.getLogger(__name__)


class SurrogateKind(str, Enum):
    INDICATOR = "indicator"
    LINEAR = "linear"
    HINGE = "hinge"
    SIGMOID = "sigmoid"
    LOG_SIGMOID = "log-sigmoid"
    GENERAL_SIGMOID = "general-sigmoid"


# Accepted spellings in configs and on the command line
SURROGATE_ALIASES = {
    "indicator": SurrogateKind.INDICATOR,
    "linear": SurrogateKind.LINEAR,
    "cp": SurrogateKind.LINEAR,
    "covariance": SurrogateKind.LINEAR,
    "hinge": SurrogateKind.HINGE,
    "sigmoid": SurrogateKind.SIGMOID,
    "log-sigmoid": SurrogateKind.LOG_SIGMOID,
    "logsigmoid": SurrogateKind.LOG_SIGMOID,
    "log_sigmoid": SurrogateKind.LOG_SIGMOID,
    "general-sigmoid": SurrogateKind.GENERAL_SIGMOID,
    "general_sigmoid": SurrogateKind.GENERAL_SIGMOID,
    "generalsigmoid": SurrogateKind.GENERAL_SIGMOID,
}


@dataclass(frozen=True)
class Surrogate:
    kind: SurrogateKind
    w: Optional[float] = None
    odd_variant: bool = False

    def __post_init__(self):
        kind = SurrogateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SurrogateKind.GENERAL_SIGMOID:
            if self.w is None or not self.w > 0 or not math.isfinite(self.w):
                raise ConfigError(f"general-sigmoid needs a finite w > 0, got {self.w!r}")
            object.__setattr__(self, "w", float(self.w))
        else:
            if self.w is not None:
                raise ConfigError(f"w is only valid for general-sigmoid, not {kind.value}")
            if self.odd_variant:
                raise ConfigError(f"odd_variant is only valid for general-sigmoid, not {kind.value}")

    @property
    def differentiable(self) -> bool:
        return self.kind is not SurrogateKind.INDICATOR

    @property
    def bounded(self) -> bool:
        return self.kind in (SurrogateKind.INDICATOR, SurrogateKind.SIGMOID, SurrogateKind.GENERAL_SIGMOID)

    @property
    def name(self) -> str:
        if self.kind is SurrogateKind.GENERAL_SIGMOID:
            suffix = ",odd" if self.odd_variant else ""
            return f"general-sigmoid:w={self.w:g}{suffix}"
        return self.kind.value

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is SurrogateKind.INDICATOR:
            return (x > 0).astype(float)
        if kind is SurrogateKind.LINEAR:
            return x.copy()
        if kind is SurrogateKind.HINGE:
            return np.maximum(x + 1.0, 0.0)
        if kind is SurrogateKind.SIGMOID:
            return expit(x)
        if kind is SurrogateKind.LOG_SIGMOID:
            # -log(sigmoid(-x)) is softplus(x)
            return np.logaddexp(0.0, x)
        g = expit(self.w * x)
        return 2.0 * g - 1.0 if self.odd_variant else g

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is SurrogateKind.INDICATOR:
            raise NotDifferentiableError("the indicator surrogate has no usable derivative")
        if kind is SurrogateKind.LINEAR:
            return np.ones_like(x)
        if kind is SurrogateKind.HINGE:
            # subgradient 0 at the kink x = -1
            return (x > -1.0).astype(float)
        if kind is SurrogateKind.SIGMOID:
            s = expit(x)
            return s * (1.0 - s)
        if kind is SurrogateKind.LOG_SIGMOID:
            return expit(x)
        s = expit(self.w * x)
        scale = 2.0 * self.w if self.odd_variant else self.w
        return scale * s * (1.0 - s)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "w": self.w, "odd_variant": self.odd_variant, "name": self.name}


@dataclass(frozen=True)
class GroupSplitSurrogate:
    """phi1 on the z=+1 group and lam * phi1 on the z=-1 group."""

    phi1: Surrogate
    lam: float

    def __post_init__(self):
        if not (self.lam >= 0) or not math.isfinite(self.lam):
            raise ConfigError(f"balance factor must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def differentiable(self) -> bool:
        return self.phi1.differentiable

    @property
    def name(self) -> str:
        return f"{self.phi1.name}|lambda={self.lam:g}"

    def to_dict(self) -> dict:
        return {"phi1": self.phi1.to_dict(), "lambda": self.lam, "name": self.name}


AnySurrogate = Union[Surrogate, GroupSplitSurrogate]


def split_parts(s: AnySurrogate) -> tuple:
    """Return (phi1, lam); a plain surrogate is the lam = 1 case."""
    if isinstance(s, GroupSplitSurrogate):
        return s.phi1, s.lam
    return s, 1.0


def _check_finite(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("surrogate input must be finite")
    return arr


def evaluate(s: Surrogate, x):
    """Surrogate value at x; scalars in, scalar out."""
    arr = _check_finite(x)
    out = s(arr)
    return float(out) if out.ndim == 0 else out


def evaluate_derivative(s: Surrogate, x):
    arr = _check_finite(x)
    out = s.derivative(arr)
    return float(out) if out.ndim == 0 else out


def gap_curve(s: Surrogate, xs) -> np.ndarray:
    """Pointwise 1[x > 0] - phi(x)."""
    arr = _check_finite(xs)
    return (arr > 0).astype(float) - s(arr)


def q_gap(w: float, x):
    """Q(x) = w*x/2 - (2*sigmoid(w*x) - 1), the distance of the odd general sigmoid from its tangent line."""
    if not w > 0:
        raise DomainError(f"w must be positive, got {w!r}")
    arr = np.asarray(x, dtype=float)
    out = 0.5 * w * arr - (2.0 * expit(w * arr) - 1.0)
    return float(out) if out.ndim == 0 else out


def parse_surrogate(name: str) -> Surrogate:
    """
    Parse names like "linear", "log-sigmoid", "general-sigmoid:w=4" or
    "general-sigmoid:w=0.5,odd".
    """
    if isinstance(name, Surrogate):
        return name
    text = str(name).strip().lower()
    base, _, params = text.partition(":")
    kind = SURROGATE_ALIASES.get(base.strip())
    if kind is None:
        suggestions = sorted({k.value for k in SurrogateKind})
        raise ConfigError(f"unknown surrogate '{name}'. Available: {suggestions}")

    w = None
    odd = False
    for token in filter(None, (p.strip() for p in params.split(","))):
        if token == "odd":
            odd = True
        elif token.startswith("w="):
            try:
                w = float(token[2:])
            except ValueError:
                raise ConfigError(f"bad w in surrogate '{name}'")
        else:
            raise ConfigError(f"unknown surrogate option '{token}' in '{name}'")

    if kind is SurrogateKind.GENERAL_SIGMOID and w is None:
        raise ConfigError(f"general-sigmoid needs w, e.g. 'general-sigmoid:w=4' (got '{name}')")
    return Surrogate(kind, w=w, odd_variant=odd)


def general_sigmoid(w: float, odd: bool = False) -> Surrogate:
    return Surrogate(SurrogateKind.GENERAL_SIGMOID, w=w, odd_variant=odd)


def all_surrogates(w: float = 4.0) -> list:
    """One instance of every family member, used by identity sweeps and tests."""
    return [
        Surrogate(SurrogateKind.INDICATOR),
        Surrogate(SurrogateKind.LINEAR),
        Surrogate(SurrogateKind.HINGE),
        Surrogate(SurrogateKind.SIGMOID),
        Surrogate(SurrogateKind.LOG_SIGMOID),
        general_sigmoid(w),
        general_sigmoid(w, odd=True),
    ]
