"""
Monte-Carlo certification of the fairness bounds and identities.

Bound checks synthesize margins directly so that their preconditions hold
by construction; statistics checks draw repeated datasets from a fixed
population; the identity check compares every closed form against a
brute-force evaluation on small random instances.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import logit

from .balanced import solve_lambda, split_gap
from .errors import ConfigError, GroupError, SamplerError, SingularLambdaError
from .metrics import (
    MarginSet,
    MistreatmentDefinition,
    cov_factor,
    cov_hat,
    ddp_hat,
    ddp_tilde,
    gap,
    gap_rhs,
    group_counts,
    mistreatment_closed_form,
    mistreatment_proxy,
    mistreatment_theorem_form,
    variance_bound,
    variance_exact,
    variance_substituted,
)
from .surrogates import Surrogate, SurrogateKind, all_surrogates, evaluate, general_sigmoid, q_gap

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10
BOUND_TOLERANCE = 1e-12

# Radii check_risk_bound can assert; every one is reported
RISK_RADII = ("two_sample", "min_group", "pooled", "stated")

# Independent random streams per check
CHECK_STREAMS = {
    "theorem1": 1,
    "theorem2": 2,
    "variance": 3,
    "risk_bound": 4,
    "cov_bias": 5,
    "cov_risk_bound": 6,
    "theorem_f1": 7,
    "identities": 8,
}


@dataclass(frozen=True)
class TrialConfig:
    trials: int = 10_000
    n_min: int = 20
    n_max: int = 200
    seed: int = 0
    epsilon: float = 0.02
    gamma: float = 0.01
    k: int = 10
    delta: float = 0.05
    beta: float = 1.0
    zeta: float = 2.0
    mu: float = 5.0
    w: float = 0.5
    f1_fraction: float = 0.0512
    f1_bound_form: str = "scaled"
    variance_reps: int = 100_000
    variance_cases: tuple = ((0.5, 0.5, 100, 100), (0.3, 0.8, 100, 60), (1.0, 1.0, 50, 50))
    risk_rates: tuple = (0.5, 0.3)
    risk_group_sizes: tuple = (500, 500)
    risk_radius: str = "two_sample"
    cov_bias_ns: tuple = (2, 10, 100)
    cov_bias_reps: int = 100_000
    cov_risk_ns: tuple = (100, 1000)
    max_retries: int = 200
    identity_max_n: int = 30

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(f"need 1 <= n_min <= n_max, got {self.n_min}..{self.n_max}")
        if int(self.seed) < 0:
            raise ConfigError("seed must be unsigned")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon!r}")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must be in (0, 1), got {self.gamma!r}")
        if int(self.k) < 0:
            raise ConfigError(f"k must be >= 0, got {self.k!r}")
        if self.k > 2 * self.n_min:
            raise ConfigError(f"k={self.k} exceeds the smallest sampled dataset ({2 * self.n_min} rows)")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta!r}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be > 0, got {self.beta!r}")
        if not 0 < self.zeta <= self.mu:
            raise ConfigError(f"need 0 < zeta <= mu, got zeta={self.zeta!r}, mu={self.mu!r}")
        if not self.w > 0:
            raise ConfigError(f"w must be > 0, got {self.w!r}")
        if not 0 <= self.f1_fraction <= 1:
            raise ConfigError(f"f1_fraction must be in [0, 1], got {self.f1_fraction!r}")
        if int(self.variance_reps) < 2 or int(self.cov_bias_reps) < 2:
            raise ConfigError("Monte-Carlo repetitions must be >= 2")
        if any(int(n) < 2 for n in self.cov_bias_ns):
            raise ConfigError("covariance-bias sample sizes must be >= 2")
        if int(self.max_retries) < 1:
            raise ConfigError("max_retries must be >= 1")
        if int(self.identity_max_n) < 2:
            raise ConfigError("identity_max_n must be >= 2")
        if self.risk_radius not in RISK_RADII:
            raise ConfigError(f"risk_radius must be one of {list(RISK_RADII)}, got {self.risk_radius!r}")
        if self.f1_bound_form not in ("scaled", "unscaled"):
            raise ConfigError(f"f1_bound_form must be 'scaled' or 'unscaled', got {self.f1_bound_form!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "TrialConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown verify options {sorted(unknown)}")
        values = dict(doc)
        for key in ("variance_cases", "risk_rates", "risk_group_sizes", "cov_bias_ns", "cov_risk_ns"):
            if key in values:
                values[key] = tuple(tuple(v) if isinstance(v, list) else v for v in values[key])
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"invalid verify config: {e}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CheckReport:
    name: str
    trials: int
    violations: int
    worst_slack: Optional[float]
    statistics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "violations": self.violations,
            "worst_slack": self.worst_slack,
            "statistics": self.statistics,
        }


@dataclass
class VerifyReport:
    checks: list
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks)

    def check(self, name: str) -> CheckReport:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "violations": self.violations,
            "checks": [c.to_dict() for c in self.checks],
            "config": self.config,
        }


def _rng(cfg: TrialConfig, name: str) -> np.random.Generator:
    return np.random.default_rng([int(cfg.seed), CHECK_STREAMS[name]])


def _single(cfg: TrialConfig, report: CheckReport) -> VerifyReport:
    status = "✅" if report.passed else "❌"
    logger.info(
        f"{status} {report.name}: trials={report.trials}, violations={report.violations}, "
        f"worst slack={report.worst_slack}"
    )
    return VerifyReport(checks=[report], config=cfg.to_dict())


# ---------- Closed-form bounds ----------

def theorem1_bound(epsilon: float, gamma: float) -> float:
    return 0.5 * epsilon + gamma


def theorem2_bound(epsilon: float, gamma: float, k: int, na: int, nb: int) -> float:
    return 0.5 * epsilon + gamma + 0.5 * (1.0 / na + 1.0 / nb) * k


def f1_bound(w: float, zeta: float, mu: float, k: int, n: int) -> float:
    frac = k / n
    return frac * q_gap(w, mu) + (1.0 - frac) * q_gap(w, zeta)


def hoeffding_two_sample_radius(delta: float, na: int, nb: int) -> float:
    return math.sqrt(0.5 * math.log(2.0 / delta) * (1.0 / na + 1.0 / nb))


def hoeffding_pooled_radius(delta: float, n: int) -> float:
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def hoeffding_min_group_radius(delta: float, na: int, nb: int) -> float:
    return math.sqrt(math.log(2.0 / delta) / (2.0 * min(na, nb)))


def stated_risk_radius(delta: float, n: int) -> float:
    return math.sqrt(0.5 * math.log(2.0 / delta)) * math.sqrt(n / (n - 1) ** 2)


def cov_risk_radius(beta: float, delta: float, n: int) -> float:
    return math.sqrt(2.0 * beta ** 2 * math.log(2.0 / delta)) * math.sqrt(n / (n - 1) ** 2)


# ---------- Bounded general sigmoid with zero or k large margins ----------

def _magnitudes(u: np.ndarray, w: float) -> np.ndarray:
    """|d| such that 2*sigmoid(w|d|) - 1 = u."""
    return logit((1.0 + u) / 2.0) / w


def _sample_bounded_instance(rng, cfg: TrialConfig, k: int):
    """Margins with all but k points having G(|d|) in [1-gamma, 1] and k points below 1-gamma."""
    na = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    nb = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    n = na + nb
    bound = theorem2_bound(cfg.epsilon, cfg.gamma, k, na, nb) if k else theorem1_bound(cfg.epsilon, cfg.gamma)

    # aim the positive rates near the bound so the check is not vacuous
    n1a = int(rng.integers(0, na + 1))
    target = rng.uniform(-bound, bound)
    n1b = int(np.clip(round(nb * (n1a / na - target)), 0, nb))

    signs = np.concatenate([
        rng.permutation(np.r_[np.ones(n1a), -np.ones(na - n1a)]),
        rng.permutation(np.r_[np.ones(n1b), -np.ones(nb - n1b)]),
    ])
    sensitive = np.r_[np.ones(na, dtype=int), -np.ones(nb, dtype=int)]

    u = rng.uniform(1.0 - cfg.gamma + 1e-12, 1.0 - 1e-12, size=n)
    if k:
        small = rng.choice(n, size=k, replace=False)
        u[small] = rng.uniform(0.0, 1.0 - cfg.gamma - 1e-12, size=k)
    d = signs * _magnitudes(u, cfg.w)
    return MarginSet(d, sensitive), bound


def _check_bounded(cfg: TrialConfig, name: str, k: int) -> VerifyReport:
    rng = _rng(cfg, name)
    G = general_sigmoid(cfg.w, odd=True)
    violations = 0
    worst = math.inf
    attempts = 0
    for trial in range(cfg.trials):
        for _ in range(cfg.max_retries):
            attempts += 1
            m, bound = _sample_bounded_instance(rng, cfg, k)
            if abs(ddp_tilde(m, G)) <= cfg.epsilon:
                break
        else:
            raise SamplerError(name, f"no admissible instance after {cfg.max_retries} draws (trial {trial})")
        observed = abs(ddp_hat(group_counts(m)))
        slack = bound - observed
        worst = min(worst, slack)
        if slack < -BOUND_TOLERANCE:
            violations += 1
    stats = {"acceptance_rate": cfg.trials / attempts, "k": k, "w": cfg.w}
    if k == 0:
        stats["bound"] = theorem1_bound(cfg.epsilon, cfg.gamma)
    return _single(cfg, CheckReport(name, cfg.trials, violations, worst, stats))


def check_theorem1(cfg: TrialConfig) -> VerifyReport:
    return _check_bounded(cfg, "theorem1", 0)


def check_theorem2(cfg: TrialConfig) -> VerifyReport:
    if cfg.k < 1:
        raise ConfigError("check_theorem2 needs k >= 1")
    return _check_bounded(cfg, "theorem2", int(cfg.k))


# ---------- Variance of the DDP estimate ----------

def check_variance(cfg: TrialConfig) -> VerifyReport:
    rng = _rng(cfg, "variance")
    reps = int(cfg.variance_reps)
    violations = 0
    worst = math.inf
    cases = []
    for pa, pb, na, nb in cfg.variance_cases:
        na, nb = int(na), int(nb)
        samples = rng.binomial(na, pa, size=reps) / na - rng.binomial(nb, pb, size=reps) / nb
        centered = (samples - samples.mean()) ** 2
        empirical = float(np.var(samples, ddof=1))
        se = float(np.std(centered, ddof=1) / math.sqrt(reps))
        exact = variance_exact(pa, pb, na, nb)
        bound = variance_bound(na, nb)
        substituted = variance_substituted(pa, na, nb)
        tol = 5.0 * se + BOUND_TOLERANCE
        matches_exact = abs(empirical - exact) <= tol
        within_bound = empirical <= bound + tol
        if not matches_exact:
            violations += 1
        if not within_bound:
            violations += 1
        worst = min(worst, bound - empirical)
        cases.append({
            "pa": pa, "pb": pb, "na": na, "nb": nb,
            "empirical": empirical, "standard_error": se,
            "exact": exact, "bound": bound, "substituted": substituted,
            "matches_exact": bool(matches_exact),
            "matches_substituted": bool(abs(empirical - substituted) <= tol),
        })
        logger.debug(f"variance case {(pa, pb, na, nb)}: empirical={empirical:.6g} exact={exact:.6g}")
    return _single(cfg, CheckReport("variance", len(cases) * reps, violations, worst, {"cases": cases}))


# ---------- Risk bound of the DDP estimate ----------

def check_risk_bound(cfg: TrialConfig) -> VerifyReport:
    rng = _rng(cfg, "risk_bound")
    pa, pb = cfg.risk_rates
    na, nb = (int(v) for v in cfg.risk_group_sizes)
    n = na + nb
    trials = int(cfg.trials)
    estimates = rng.binomial(na, pa, size=trials) / na - rng.binomial(nb, pb, size=trials) / nb
    deviation = np.abs(estimates - (pa - pb))

    radii = {
        "two_sample": hoeffding_two_sample_radius(cfg.delta, na, nb),
        "pooled": hoeffding_pooled_radius(cfg.delta, n),
        "min_group": hoeffding_min_group_radius(cfg.delta, na, nb),
        "stated": stated_risk_radius(cfg.delta, n),
    }
    coverage = {key: float(np.mean(deviation <= r)) for key, r in radii.items()}
    target = 1.0 - cfg.delta
    asserted = cfg.risk_radius
    violations = int(coverage[asserted] < target)
    stats = {"radii": radii, "coverage": coverage, "asserted_radius": asserted, "target_coverage": target, "true_ddp": pa - pb}
    return _single(cfg, CheckReport("risk_bound", trials, violations, coverage[asserted] - target, stats))


# ---------- Covariance estimator bias and concentration ----------

def _population(beta: float) -> dict:
    """z = +1 w.p. 0.4; d | z uniform on [c_z - h, c_z + h], |d| <= beta."""
    q = 0.4
    centers = {1: 0.5 * beta, -1: -0.25 * beta}
    half_width = 0.5 * beta
    ez = q - (1 - q)
    ed = q * centers[1] + (1 - q) * centers[-1]
    ezd = q * centers[1] - (1 - q) * centers[-1]
    return {"q": q, "centers": centers, "half_width": half_width, "cov": ezd - ez * ed}


def _draw_population(rng, pop: dict, reps: int, n: int) -> tuple:
    z = np.where(rng.random((reps, n)) < pop["q"], 1.0, -1.0)
    centers = np.where(z > 0, pop["centers"][1], pop["centers"][-1])
    d = centers + rng.uniform(-pop["half_width"], pop["half_width"], size=(reps, n))
    return z, d


def _empirical_cov(z: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Row-wise (1/N) sum (z - zbar) d."""
    return np.mean((z - z.mean(axis=1, keepdims=True)) * d, axis=1)


def check_cov_bias(cfg: TrialConfig) -> VerifyReport:
    rng = _rng(cfg, "cov_bias")
    pop = _population(cfg.beta)
    cov = pop["cov"]
    reps = int(cfg.cov_bias_reps)
    chunk = 10_000
    violations = 0
    worst = math.inf
    rows = []
    for n in (int(v) for v in cfg.cov_bias_ns):
        parts = []
        for start in range(0, reps, chunk):
            z, d = _draw_population(rng, pop, min(chunk, reps - start), n)
            parts.append(_empirical_cov(z, d))
        biased = np.concatenate(parts)
        corrected = biased * n / (n - 1)

        expected = (n - 1) / n * cov
        se_biased = float(np.std(biased, ddof=1) / math.sqrt(reps))
        se_corrected = float(np.std(corrected, ddof=1) / math.sqrt(reps))
        err_biased = abs(float(biased.mean()) - expected)
        err_corrected = abs(float(corrected.mean()) - cov)
        if err_biased > 5.0 * se_biased:
            violations += 1
        if err_corrected > 5.0 * se_corrected:
            violations += 1
        worst = min(worst, 5.0 * se_biased - err_biased, 5.0 * se_corrected - err_corrected)
        rows.append({
            "n": n,
            "ratio": float(biased.mean()) / cov,
            "expected_ratio": (n - 1) / n,
            "corrected_ratio": float(corrected.mean()) / cov,
            "standard_error": se_biased,
        })
    return _single(cfg, CheckReport("cov_bias", reps * len(rows), violations, worst,
                                    {"population_cov": cov, "sizes": rows}))


def check_cov_risk_bound(cfg: TrialConfig) -> VerifyReport:
    rng = _rng(cfg, "cov_risk_bound")
    pop = _population(cfg.beta)
    trials = int(cfg.trials)
    target = 1.0 - cfg.delta
    violations = 0
    worst = math.inf
    rows = []
    for n in (int(v) for v in cfg.cov_risk_ns):
        deviations = []
        for start in range(0, trials, 1000):
            z, d = _draw_population(rng, pop, min(1000, trials - start), n)
            deviations.append(np.abs(_empirical_cov(z, d) - pop["cov"]))
        deviation = np.concatenate(deviations)
        radius = cov_risk_radius(cfg.beta, cfg.delta, n)
        coverage = float(np.mean(deviation <= radius))
        if coverage < target:
            violations += 1
        worst = min(worst, coverage - target)
        rows.append({"n": n, "radius": radius, "coverage": coverage})
    return _single(cfg, CheckReport("cov_risk_bound", trials * len(rows), violations, worst,
                                    {"target_coverage": target, "sizes": rows}))


# ---------- Closeness of the odd general sigmoid to a linear function ----------

def check_theorem_f1(cfg: TrialConfig) -> VerifyReport:
    rng = _rng(cfg, "theorem_f1")
    G = general_sigmoid(cfg.w, odd=True)
    violations = 0
    unscaled_exceedances = 0
    worst = math.inf
    for _ in range(cfg.trials):
        na = int(rng.integers(cfg.n_min, cfg.n_max + 1))
        nb = int(rng.integers(cfg.n_min, cfg.n_max + 1))
        n = na + nb
        k = min(n, int(round(cfg.f1_fraction * n)))
        z = rng.permutation(np.r_[np.ones(na), -np.ones(nb)])
        magnitude = rng.uniform(0.0, cfg.zeta, size=n)
        if k:
            large = rng.choice(n, size=k, replace=False)
            magnitude[large] = rng.uniform(cfg.zeta, cfg.mu, size=k)
        d = rng.choice((-1.0, 1.0), size=n) * magnitude

        centered = z - z.mean()
        lhs = abs(float(np.mean(centered * (0.5 * cfg.w * d)) - np.mean(centered * G(d))))
        stated = f1_bound(cfg.w, cfg.zeta, cfg.mu, k, n)
        # the stated bound assumes |z - zbar| <= 1, exact only for equal groups
        scaled = float(np.max(np.abs(centered))) * stated
        asserted = scaled if cfg.f1_bound_form == "scaled" else stated
        worst = min(worst, asserted - lhs)
        if lhs > asserted + BOUND_TOLERANCE:
            violations += 1
        if lhs > stated + BOUND_TOLERANCE:
            unscaled_exceedances += 1
    stats = {
        "w": cfg.w,
        "zeta": cfg.zeta,
        "mu": cfg.mu,
        "fraction": cfg.f1_fraction,
        "q_zeta": q_gap(cfg.w, cfg.zeta),
        "q_mu": q_gap(cfg.w, cfg.mu),
        "bound_at_fraction": cfg.f1_fraction * q_gap(cfg.w, cfg.mu) + (1 - cfg.f1_fraction) * q_gap(cfg.w, cfg.zeta),
        "unscaled_bound_exceedances": unscaled_exceedances,
        "bound_form": cfg.f1_bound_form,
    }
    return _single(cfg, CheckReport("theorem_f1", cfg.trials, violations, worst, stats))


# ---------- Identities ----------

def _reference_value(s: Surrogate, x: float) -> float:
    """Scalar definition of each surrogate, independent of the vectorized evaluator."""
    kind = s.kind
    if kind is SurrogateKind.INDICATOR:
        return 1.0 if x > 0 else 0.0
    if kind is SurrogateKind.LINEAR:
        return x
    if kind is SurrogateKind.HINGE:
        return max(x + 1.0, 0.0)
    if kind is SurrogateKind.LOG_SIGMOID:
        return x + math.log1p(math.exp(-x)) if x > 0 else math.log1p(math.exp(x))

    def sig(t):
        return 1.0 / (1.0 + math.exp(-t)) if t >= 0 else math.exp(t) / (1.0 + math.exp(t))

    if kind is SurrogateKind.SIGMOID:
        return sig(x)
    g = sig(s.w * x)
    return 2.0 * g - 1.0 if s.odd_variant else g


def _random_instance(rng, max_n: int) -> MarginSet:
    n = int(rng.integers(4, max_n + 1))
    z = np.r_[1, -1, rng.choice((-1, 1), size=n - 2)]
    y = np.r_[1, 0, rng.integers(0, 2, size=n - 2)]
    d = rng.normal(0.0, 2.0, size=n)
    # exact zeros exercise the d <= 0 tie rule
    d[rng.random(n) < 0.1] = 0.0
    order = rng.permutation(n)
    return MarginSet(d[order], z[order], y[order])


def _close(a: float, b: float, scale: float = 1.0) -> bool:
    return abs(a - b) <= IDENTITY_TOLERANCE * max(1.0, scale)


def check_identities(cfg: TrialConfig, surrogate_eval: Optional[Callable] = None) -> VerifyReport:
    """
    Gap identity, covariance proportionality, indicator collapse, the
    mistreatment closed forms, balance-factor gap zeroing and a scalar
    reference for each surrogate evaluator.
    """
    rng = _rng(cfg, "identities")
    evaluator = surrogate_eval or evaluate
    family = all_surrogates(w=4.0)
    indicator = family[0]
    failures = {
        "gap_identity": 0,
        "proportionality": 0,
        "indicator_collapse": 0,
        "mistreatment": 0,
        "lambda_zeroes_gap": 0,
        "surrogate_reference": 0,
    }
    worst = 0.0
    for _ in range(cfg.trials):
        m = _random_instance(rng, cfg.identity_max_n)
        dhat = ddp_hat(group_counts(m))
        if ddp_tilde(m, indicator) != dhat:
            failures["indicator_collapse"] += 1

        factor = cov_factor(m)
        for s in family:
            lhs, rhs = gap(m, s), gap_rhs(m, s)
            worst = max(worst, abs(lhs - rhs))
            if not _close(lhs, rhs):
                failures["gap_identity"] += 1
            if not _close(cov_hat(m, s), factor * ddp_tilde(m, s)):
                failures["proportionality"] += 1

            for definition in MistreatmentDefinition:
                try:
                    proxy = mistreatment_proxy(m, definition, s)
                except GroupError:
                    continue
                if not _close(proxy, mistreatment_closed_form(m, definition, s)):
                    failures["mistreatment"] += 1
                if s.kind is SurrogateKind.LINEAR and not _close(proxy, mistreatment_theorem_form(m, definition)):
                    failures["mistreatment"] += 1

            if s.differentiable:
                try:
                    lam = solve_lambda(m, s)
                except SingularLambdaError:
                    continue
                if not _close(split_gap(m, s, lam), 0.0, abs(lam)):
                    failures["lambda_zeroes_gap"] += 1

        xs = rng.normal(0.0, 3.0, size=4)
        for s in family:
            got = np.asarray(evaluator(s, xs), dtype=float)
            for x, value in zip(xs.tolist(), got.tolist()):
                ref = _reference_value(s, x)
                if not _close(value, ref, abs(ref)):
                    failures["surrogate_reference"] += 1

    violations = sum(failures.values())
    stats = {"failures": failures, "max_gap_identity_error": worst, "surrogates": [s.name for s in family]}
    return _single(cfg, CheckReport("identities", cfg.trials, violations, IDENTITY_TOLERANCE - worst, stats))


CHECKS = {
    "theorem1": check_theorem1,
    "theorem2": check_theorem2,
    "variance": check_variance,
    "risk_bound": check_risk_bound,
    "cov_bias": check_cov_bias,
    "cov_risk_bound": check_cov_risk_bound,
    "theorem_f1": check_theorem_f1,
    "identities": check_identities,
}


def run_all(cfg: TrialConfig, surrogate_eval: Optional[Callable] = None, jobs: int = 1,
            only: Optional[list] = None) -> VerifyReport:
    """Run every check (or the named subset) and merge the reports in a fixed order."""
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}. Available: {list(CHECKS)}")

    def run_one(name):
        if name == "identities":
            return check_identities(cfg, surrogate_eval=surrogate_eval)
        return CHECKS[name](cfg)

    logger.info(f"🔄 Running {len(names)} verification checks (jobs={jobs})")
    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        futures = [pool.submit(run_one, name) for name in names]
        reports = [f.result() for f in futures]

    merged = VerifyReport(checks=[r.checks[0] for r in reports], config=cfg.to_dict())
    status = "✅" if merged.passed else "❌"
    logger.info(f"{status} Verification finished: {merged.violations} violations across {len(names)} checks")
    return merged
