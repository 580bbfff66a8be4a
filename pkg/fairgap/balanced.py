"""
Balanced surrogates: retrain under phi1 on the protected group and lam * phi1
on the unprotected group, re-solving lam after each fit so that the
surrogate estimate matches the empirical DDP on the training margins.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigError, NotDifferentiableError, SingularLambdaError
from .metrics import MarginSet, accuracy, ddp_hat, ddp_tilde, group_counts, margins
from .surrogates import GroupSplitSurrogate, Surrogate
from .trainer import LinearModel, TrainConfig, train

logger = logging.getLogger(__name__)


class Termination(str, Enum):
    THRESHOLD = "threshold"
    MAX_ITER = "max_iter"
    LAMBDA_NONPOSITIVE = "lambda_nonpositive"


@dataclass(frozen=True)
class BalancedConfig:
    lambda0: float = 1.0
    alpha: float = 0.9
    eta: float = 0.01
    tau: int = 50
    restart_from_theta0: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha!r}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be > 0, got {self.eta!r}")
        if int(self.tau) < 1:
            raise ConfigError(f"tau must be >= 1, got {self.tau!r}")
        if not self.lambda0 >= 0 or not math.isfinite(self.lambda0):
            raise ConfigError(f"lambda0 must be finite and >= 0, got {self.lambda0!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "BalancedConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown balanced options {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "alpha": self.alpha,
            "eta": self.eta,
            "tau": self.tau,
            "restart_from_theta0": self.restart_from_theta0,
        }


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    lambda_raw: Optional[float]
    lambda_smoothed: float
    ddp_hat: float
    ddp_tilde: float
    gap: float
    accuracy: float
    epochs_run: int
    converged: bool


@dataclass
class BalancedResult:
    model: LinearModel
    lambda_trace: list
    iterations: int
    terminated_by: Termination
    reports: list = field(default_factory=list)
    theta0: Optional[LinearModel] = None

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "theta0": None if self.theta0 is None else self.theta0.to_dict(),
            "lambda_trace": list(self.lambda_trace),
            "iterations": self.iterations,
            "terminated_by": self.terminated_by.value,
            "reports": [r.__dict__ for r in self.reports],
        }


def solve_lambda(m: MarginSet, phi1: Surrogate) -> float:
    """Balance factor that makes DDP_hat equal the group-split estimate."""
    c = group_counts(m)
    values = phi1(m.margins)
    sum_a = float(np.sum(values[m.protected]))
    sum_b = float(np.sum(values[m.unprotected]))
    denominator = c.na * sum_b
    if denominator == 0.0 or not math.isfinite(denominator):
        raise SingularLambdaError(f"unprotected surrogate sum is {sum_b!r}; balance factor undefined")
    return (c.nb * sum_a - (c.n1a * c.n0b - c.n0a * c.n1b)) / denominator


def split_gap(m: MarginSet, phi1: Surrogate, lam: float) -> float:
    """DDP_hat minus the group-split estimate, for any real lam."""
    na, nb = m.group_sizes()
    values = phi1(m.margins)
    estimate = np.sum(values[m.protected]) / na - lam * np.sum(values[m.unprotected]) / nb
    return float(ddp_hat(group_counts(m)) - estimate)


def smooth(lambda_prev: float, lambda_new: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha!r}")
    return alpha * lambda_new + (1.0 - alpha) * lambda_prev


def run(data, phi1: Surrogate, bcfg: BalancedConfig, tcfg: TrainConfig) -> BalancedResult:
    if not phi1.differentiable:
        raise NotDifferentiableError(f"balanced surrogates need a differentiable phi1, got '{phi1.name}'")

    base = train(data, phi1, tcfg.with_rho(0.0))
    theta0 = base.model
    logger.info(f"📊 Unconstrained start: objective={base.final_objective:.6f}")

    lam_prev = float(bcfg.lambda0)
    trace = [lam_prev]
    reports = []
    model = theta0
    terminated_by = Termination.MAX_ITER
    t = 0
    for t in range(1, int(bcfg.tau) + 1):
        start = theta0 if bcfg.restart_from_theta0 else model
        surrogate = GroupSplitSurrogate(phi1, lam_prev)
        result = train(data, surrogate, tcfg, init_model=start)
        model = result.model

        m = margins(model, data)
        try:
            lam_raw = solve_lambda(m, phi1)
            lam_t = smooth(lam_prev, lam_raw, bcfg.alpha)
        except SingularLambdaError as e:
            logger.warning(f"⚠️ {e}")
            lam_raw = None
            lam_t = -math.inf

        reports.append(IterationReport(
            iteration=t,
            lambda_raw=lam_raw,
            lambda_smoothed=lam_t if lam_t > 0 else 1.0,
            ddp_hat=ddp_hat(group_counts(m)),
            ddp_tilde=ddp_tilde(m, surrogate),
            gap=split_gap(m, phi1, lam_prev),
            accuracy=accuracy(m),
            epochs_run=result.epochs_run,
            converged=result.converged,
        ))

        if lam_t <= 0:
            trace.append(1.0)
            terminated_by = Termination.LAMBDA_NONPOSITIVE
            logger.warning(f"⚠️ Balance factor non-positive at iteration {t}; reset to 1 and stopping")
            break

        trace.append(lam_t)
        logger.info(f"🔄 Iteration {t}: lambda'={lam_raw:.6f} lambda={lam_t:.6f} ddp_hat={reports[-1].ddp_hat:.4f}")
        if abs(lam_t - lam_prev) <= bcfg.eta:
            terminated_by = Termination.THRESHOLD
            break
        lam_prev = lam_t

    logger.info(f"✅ Balanced run finished after {t} iterations ({terminated_by.value}), lambda={trace[-1]:.6f}")
    return BalancedResult(
        model=model,
        lambda_trace=trace,
        iterations=t,
        terminated_by=terminated_by,
        reports=reports,
        theta0=theta0,
    )
