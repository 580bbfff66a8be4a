"""
Full-batch gradient descent for linear classifiers.

The objective is the mean logistic loss plus rho * pen(DDP_tilde), where
DDP_tilde is the surrogate estimate of demographic-parity difference and
pen is the identity, absolute value or square.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DimensionError, DomainError, NotDifferentiableError, TrainingError
from .metrics import MarginSet, ddp_tilde
from .surrogates import AnySurrogate, split_parts

logger = logging.getLogger(__name__)


class PenaltyMode(str, Enum):
    SIGNED = "signed"
    ABSOLUTE = "absolute"
    SQUARED = "squared"


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or not math.isfinite(self.bias):
            raise DomainError("model parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.weights.size

    @classmethod
    def zeros(cls, d: int) -> "LinearModel":
        return cls(np.zeros(d), 0.0)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearModel":
        return cls(np.asarray(doc["weights"], dtype=float), float(doc["bias"]))


@dataclass(frozen=True)
class TrainConfig:
    rho: float = 0.0
    penalty_mode: PenaltyMode = PenaltyMode.ABSOLUTE
    learning_rate: float = 1.0
    max_epochs: int = 1000
    grad_tolerance: float = 1e-5
    seed: int = 0
    init: str = "zeros"
    init_scale: float = 0.01
    weight_decay: float = 0.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        object.__setattr__(self, "penalty_mode", PenaltyMode(self.penalty_mode))
        if not self.rho >= 0 or not math.isfinite(self.rho):
            raise ConfigError(f"rho must be finite and >= 0, got {self.rho!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate!r}")
        if not self.grad_tolerance > 0:
            raise ConfigError(f"grad_tolerance must be > 0, got {self.grad_tolerance!r}")
        if int(self.max_epochs) < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs!r}")
        if int(self.seed) < 0:
            raise ConfigError("seed must be unsigned")
        if self.init not in ("zeros", "gaussian"):
            raise ConfigError(f"init must be 'zeros' or 'gaussian', got {self.init!r}")
        if not self.weight_decay >= 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay!r}")
        if not 0 < self.backtrack_factor < 1:
            raise ConfigError(f"backtrack_factor must be in (0, 1), got {self.backtrack_factor!r}")

    def with_rho(self, rho: float) -> "TrainConfig":
        return TrainConfig(**{**self.to_dict(), "rho": rho})

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown training options {sorted(unknown)}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid training config: {e}")

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "penalty_mode": self.penalty_mode.value,
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "grad_tolerance": self.grad_tolerance,
            "seed": self.seed,
            "init": self.init,
            "init_scale": self.init_scale,
            "weight_decay": self.weight_decay,
            "backtrack_factor": self.backtrack_factor,
            "armijo_c": self.armijo_c,
            "max_backtracks": self.max_backtracks,
        }


@dataclass
class TrainResult:
    model: LinearModel
    epochs_run: int
    final_objective: float
    converged: bool
    objective_trace: np.ndarray
    stop_reason: str = ""
    surrogate: str = ""
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "epochs_run": self.epochs_run,
            "final_objective": self.final_objective,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "surrogate": self.surrogate,
            "config": self.config,
            "objective_trace": np.asarray(self.objective_trace).tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainResult":
        return cls(
            model=LinearModel.from_dict(doc["model"]),
            epochs_run=int(doc["epochs_run"]),
            final_objective=float(doc["final_objective"]),
            converged=bool(doc["converged"]),
            objective_trace=np.asarray(doc.get("objective_trace", []), dtype=float),
            stop_reason=doc.get("stop_reason", ""),
            surrogate=doc.get("surrogate", ""),
            config=doc.get("config", {}),
        )


def _check_dim(model: LinearModel, features: np.ndarray) -> None:
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise DimensionError(f"model has {model.dim} weights, features have shape {features.shape}")


def _scores(model: LinearModel, data) -> np.ndarray:
    _check_dim(model, data.features)
    return data.features @ model.weights + model.bias


def logistic_loss(model: LinearModel, data) -> float:
    s = _scores(model, data)
    # log(1 + e^s) - y*s is the cross-entropy against sigmoid(s)
    return float(np.mean(np.logaddexp(0.0, s) - data.labels * s))


def _penalty(value: float, mode: PenaltyMode) -> float:
    if mode is PenaltyMode.SIGNED:
        return value
    if mode is PenaltyMode.ABSOLUTE:
        return abs(value)
    return value * value


def _penalty_derivative(value: float, mode: PenaltyMode) -> float:
    if mode is PenaltyMode.SIGNED:
        return 1.0
    if mode is PenaltyMode.ABSOLUTE:
        return float(np.sign(value))
    return 2.0 * value


def _fairness_estimate(scores: np.ndarray, data, s: AnySurrogate) -> float:
    return ddp_tilde(MarginSet(scores, data.sensitive), s)


def objective(model: LinearModel, data, s: AnySurrogate, cfg: TrainConfig) -> float:
    value = logistic_loss(model, data)
    if cfg.rho > 0:
        value += cfg.rho * _penalty(_fairness_estimate(_scores(model, data), data, s), cfg.penalty_mode)
    if cfg.weight_decay > 0:
        value += 0.5 * cfg.weight_decay * float(model.weights @ model.weights)
    return value


def gradient(model: LinearModel, data, s: AnySurrogate, cfg: TrainConfig) -> tuple:
    """(d objective / d weights, d objective / d bias)."""
    scores = _scores(model, data)
    x = data.features
    n = x.shape[0]
    residual = expit(scores) - data.labels
    grad_w = x.T @ residual / n
    grad_b = float(np.sum(residual) / n)

    if cfg.rho > 0:
        phi1, lam = split_parts(s)
        if not phi1.differentiable:
            raise NotDifferentiableError(f"surrogate '{phi1.name}' cannot be used with rho > 0")
        outer = cfg.rho * _penalty_derivative(_fairness_estimate(scores, data, s), cfg.penalty_mode)
        if outer != 0.0:
            a = data.sensitive == 1
            b = ~a
            na, nb = int(np.sum(a)), int(np.sum(b))
            dphi = phi1.derivative(scores)
            # d DDP_tilde / d score_i: +phi'/N_a on z=+1, -lam*phi'/N_b on z=-1
            coeff = np.where(a, dphi / na, -lam * dphi / nb)
            grad_w = grad_w + outer * (x.T @ coeff)
            grad_b = grad_b + outer * float(np.sum(coeff))

    if cfg.weight_decay > 0:
        grad_w = grad_w + cfg.weight_decay * model.weights
    return grad_w, grad_b


def predict(model: LinearModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    _check_dim(model, x)
    return (x @ model.weights + model.bias > 0).astype(int)


def initial_model(d: int, cfg: TrainConfig) -> LinearModel:
    if cfg.init == "zeros":
        return LinearModel.zeros(d)
    rng = np.random.default_rng(cfg.seed)
    w = rng.normal(0.0, cfg.init_scale, size=d + 1)
    return LinearModel(w[:d], float(w[d]))


def train(data, s: AnySurrogate, cfg: TrainConfig, init_model: Optional[LinearModel] = None) -> TrainResult:
    """Gradient descent with Armijo backtracking; deterministic for a fixed config."""
    model = init_model if init_model is not None else initial_model(data.features.shape[1], cfg)
    _check_dim(model, data.features)

    current = objective(model, data, s, cfg)
    trace = [current]
    if not math.isfinite(current):
        raise TrainingError("objective is not finite at the initial model", trace=trace)

    converged = False
    stop_reason = "max_epochs"
    epochs = 0
    for epoch in range(1, cfg.max_epochs + 1):
        gw, gb = gradient(model, data, s, cfg)
        gnorm_sq = float(gw @ gw + gb * gb)
        if math.sqrt(gnorm_sq) <= cfg.grad_tolerance:
            converged = True
            stop_reason = "gradient_tolerance"
            break

        step = cfg.learning_rate
        accepted = None
        saw_finite = False
        for _ in range(cfg.max_backtracks):
            w_new = model.weights - step * gw
            b_new = model.bias - step * gb
            if np.all(np.isfinite(w_new)) and math.isfinite(b_new):
                candidate = LinearModel(w_new, b_new)
                try:
                    value = objective(candidate, data, s, cfg)
                except DomainError:
                    value = math.inf
                if math.isfinite(value):
                    saw_finite = True
                    if value <= current - cfg.armijo_c * step * gnorm_sq:
                        accepted = (candidate, value)
                        break
            step *= cfg.backtrack_factor

        if accepted is None:
            if not saw_finite:
                raise TrainingError(f"objective diverged at epoch {epoch}", trace=trace)
            stop_reason = "line_search_stall"
            break

        model, current = accepted
        trace.append(current)
        epochs = epoch
        logger.debug(f"epoch {epoch}: objective={current:.6f} step={step:.3g} |grad|={math.sqrt(gnorm_sq):.3g}")

    name = s.name
    logger.info(
        f"✅ Trained {name} (rho={cfg.rho:g}, {cfg.penalty_mode.value}): "
        f"epochs={epochs}, objective={current:.6f}, converged={converged}"
    )
    return TrainResult(
        model=model,
        epochs_run=epochs,
        final_objective=current,
        converged=converged,
        objective_trace=np.asarray(trace),
        stop_reason=stop_reason,
        surrogate=name,
        config=cfg.to_dict(),
    )
