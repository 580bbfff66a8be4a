"""Fairness quantities over a set of classifier margins."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from .errors import DimensionError, DomainError, GroupError
from .surrogates import AnySurrogate, Surrogate, split_parts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarginSet:
    margins: np.ndarray
    sensitive: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        d = np.asarray(self.margins, dtype=float).reshape(-1)
        z = np.asarray(self.sensitive).astype(int).reshape(-1)
        if d.shape != z.shape:
            raise DimensionError(f"{d.size} margins but {z.size} sensitive values")
        if not np.all(np.isfinite(d)):
            raise DomainError("margins must be finite")
        if not np.all(np.isin(z, (-1, 1))):
            raise DomainError("sensitive values must be -1 or +1")
        object.__setattr__(self, "margins", d)
        object.__setattr__(self, "sensitive", z)
        if self.labels is not None:
            y = np.asarray(self.labels).astype(int).reshape(-1)
            if y.shape != d.shape:
                raise DimensionError(f"{d.size} margins but {y.size} labels")
            if not np.all(np.isin(y, (0, 1))):
                raise DomainError("labels must be 0 or 1")
            object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.margins.size

    @property
    def predictions(self) -> np.ndarray:
        return (self.margins > 0).astype(int)

    @property
    def protected(self) -> np.ndarray:
        return self.sensitive == 1

    @property
    def unprotected(self) -> np.ndarray:
        return self.sensitive == -1

    def group_sizes(self) -> tuple:
        na = int(np.sum(self.protected))
        nb = self.n - na
        if na == 0 or nb == 0:
            raise GroupError(f"both sensitive groups must be present (sizes {na}/{nb})")
        return na, nb

    def signed_labels(self) -> np.ndarray:
        """Labels mapped 0 -> -1."""
        if self.labels is None:
            raise DomainError("labels are required for this metric")
        return 2 * self.labels - 1


@dataclass(frozen=True)
class GroupCounts:
    n1a: int
    n1b: int
    n0a: int
    n0b: int

    def __post_init__(self):
        if min(self.n1a, self.n1b, self.n0a, self.n0b) < 0:
            raise DomainError("group counts must be nonnegative")

    @property
    def na(self) -> int:
        return self.n1a + self.n0a

    @property
    def nb(self) -> int:
        return self.n1b + self.n0b

    @property
    def n(self) -> int:
        return self.na + self.nb


@dataclass(frozen=True)
class ConfusionByGroup:
    tp_plus: int
    tn_plus: int
    fp_plus: int
    fn_plus: int
    tp_minus: int
    tn_minus: int
    fp_minus: int
    fn_minus: int

    @property
    def total(self) -> int:
        return sum(asdict(self).values())

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MarginCellStats:
    group: int
    predicted: int
    q1: float
    median: float
    q3: float
    lo_fence: float
    hi_fence: float
    n: int
    n_outliers: int

    @property
    def rate(self) -> float:
        return self.n_outliers / self.n if self.n else 0.0


@dataclass(frozen=True)
class LargeMarginStats:
    cells: list
    n: int
    n_outliers: int

    @property
    def overall_rate(self) -> float:
        return self.n_outliers / self.n if self.n else 0.0

    def cell(self, group: int, predicted: int) -> Optional[MarginCellStats]:
        for c in self.cells:
            if c.group == group and c.predicted == predicted:
                return c
        return None

    def to_frame(self) -> pd.DataFrame:
        columns = ["group", "predicted", "q1", "median", "q3", "lo_fence", "hi_fence", "n", "n_outliers"]
        return pd.DataFrame([{k: getattr(c, k) for k in columns} for c in self.cells], columns=columns)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_outliers": self.n_outliers,
            "overall_rate": self.overall_rate,
            "cells": [dict(asdict(c), rate=c.rate) for c in self.cells],
        }


class MistreatmentDefinition(str, Enum):
    OMR = "omr"
    FPR = "fpr"
    FNR = "fnr"
    BALANCE_POS = "balance_pos"
    BALANCE_NEG = "balance_neg"


# ---------- Margins and counts ----------

def margins(model, data, normalize: bool = False) -> MarginSet:
    """
    Signed distance d(x) = w.x + b for every row of a Dataset.

    With normalize=True the score is divided by ||w|| so boxplots are
    comparable across runs; a zero weight vector is left unscaled.
    """
    x = data.features
    w = np.asarray(model.weights, dtype=float)
    if x.shape[1] != w.size:
        raise DimensionError(f"model has {w.size} weights, data has {x.shape[1]} features")
    d = x @ w + float(model.bias)
    if normalize:
        norm = float(np.linalg.norm(w))
        if norm > 0:
            d = d / norm
    return MarginSet(margins=d, sensitive=data.sensitive, labels=data.labels)


def group_counts(m: MarginSet) -> GroupCounts:
    m.group_sizes()
    pos = m.margins > 0
    return GroupCounts(
        n1a=int(np.sum(pos & m.protected)),
        n1b=int(np.sum(pos & m.unprotected)),
        n0a=int(np.sum(~pos & m.protected)),
        n0b=int(np.sum(~pos & m.unprotected)),
    )


def ddp_hat(c: GroupCounts) -> float:
    if c.na < 1 or c.nb < 1:
        raise GroupError(f"both groups need at least one member (sizes {c.na}/{c.nb})")
    return c.n1a / c.na - c.n1b / c.nb


def accuracy(m: MarginSet) -> float:
    if m.labels is None:
        raise DomainError("labels are required for accuracy")
    return float(np.mean(m.predictions == m.labels))


# ---------- Surrogate estimates ----------

def _group_values(m: MarginSet, s: AnySurrogate) -> np.ndarray:
    """phi_z(d_i): phi1 on z=+1, lam * phi1 on z=-1."""
    phi1, lam = split_parts(s)
    values = phi1(m.margins)
    return np.where(m.protected, values, lam * values)


def ddp_tilde(m: MarginSet, s: AnySurrogate) -> float:
    na, nb = m.group_sizes()
    phi1, lam = split_parts(s)
    values = phi1(m.margins)
    return float(np.sum(values[m.protected]) / na - lam * np.sum(values[m.unprotected]) / nb)


def cov_hat(m: MarginSet, s: AnySurrogate) -> float:
    m.group_sizes()
    z = m.sensitive.astype(float)
    return float(np.sum((z - z.mean()) * _group_values(m, s)) / m.n)


def cov_factor(m: MarginSet) -> float:
    """2 N_a N_b / N^2, the ratio between cov_hat and ddp_tilde."""
    na, nb = m.group_sizes()
    return 2.0 * na * nb / float(m.n) ** 2


def gap(m: MarginSet, s: AnySurrogate) -> float:
    return ddp_hat(group_counts(m)) - ddp_tilde(m, s)


def gap_rhs(m: MarginSet, s: AnySurrogate) -> float:
    """Per-group mean of 1[d > 0] - phi(d), protected minus unprotected."""
    na, nb = m.group_sizes()
    residual = (m.margins > 0).astype(float) - _group_values(m, s)
    return float(np.sum(residual[m.protected]) / na - np.sum(residual[m.unprotected]) / nb)


# ---------- Variance of the DDP estimate ----------

def _check_variance_args(na, nb, *probs) -> None:
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    if na < 1 or nb < 1:
        raise DomainError(f"group sizes must be >= 1, got {na}/{nb}")


def variance_exact(pa: float, pb: float, na: int, nb: int) -> float:
    _check_variance_args(na, nb, pa, pb)
    return pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb


def variance_bound(na: int, nb: int) -> float:
    _check_variance_args(na, nb)
    return 0.25 * (1.0 / na + 1.0 / nb)


def variance_substituted(pa: float, na: int, nb: int) -> float:
    """Closed form after substituting pb = 1 - pa."""
    _check_variance_args(na, nb, pa)
    inv = 1.0 / na + 1.0 / nb
    return 0.25 * inv - inv * (pa - 0.5) ** 2


# ---------- Large margin points ----------

def _cell_stats(group: int, predicted: int, values: np.ndarray) -> MarginCellStats:
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    n_out = int(np.sum((values < lo) | (values > hi)))
    return MarginCellStats(
        group=group, predicted=predicted,
        q1=float(q1), median=float(med), q3=float(q3),
        lo_fence=float(lo), hi_fence=float(hi),
        n=int(values.size), n_outliers=n_out,
    )


def large_margin_stats(m: MarginSet, values=None) -> LargeMarginStats:
    """
    Tukey boxplot statistics per (group, predicted class) cell.

    Cells are defined by the sign of the margins; the statistics are taken
    on `values` when given (e.g. a surrogate image of the margins).
    """
    v = m.margins if values is None else np.asarray(values, dtype=float).reshape(-1)
    if v.shape != m.margins.shape:
        raise DimensionError(f"{v.size} values for {m.n} margins")
    pred = m.predictions
    cells = []
    for group in (1, -1):
        for predicted in (1, 0):
            mask = (m.sensitive == group) & (pred == predicted)
            if np.any(mask):
                cells.append(_cell_stats(group, predicted, v[mask]))
    n_out = sum(c.n_outliers for c in cells)
    return LargeMarginStats(cells=cells, n=m.n, n_outliers=n_out)


# ---------- Mistreatment and balance-for-class proxies ----------

def _proxy_terms(m: MarginSet, definition) -> tuple:
    """(g, mask): the proxy argument per row and the rows it sums over."""
    definition = MistreatmentDefinition(definition)
    y = m.signed_labels()
    d = m.margins
    if definition is MistreatmentDefinition.OMR:
        g = np.minimum(0.0, y * d)
        mask = np.ones(m.n, dtype=bool)
    elif definition is MistreatmentDefinition.FPR:
        g = np.minimum(0.0, (1 - y) / 2 * y * d)
        mask = y == -1
    elif definition is MistreatmentDefinition.FNR:
        g = np.minimum(0.0, (1 + y) / 2 * y * d)
        mask = y == 1
    elif definition is MistreatmentDefinition.BALANCE_POS:
        g = (1 + y) / 2 * d
        mask = y == 1
    else:
        g = (1 - y) / 2 * d
        mask = y == -1
    if not np.any(mask):
        raise GroupError(f"no rows with the label subset required by '{definition.value}'")
    return g, mask


def mistreatment_proxy(m: MarginSet, definition, s: Surrogate) -> float:
    m.group_sizes()
    g, mask = _proxy_terms(m, definition)
    z = m.sensitive.astype(float)
    zbar = z.mean()
    return float(np.sum((z[mask] - zbar) * s(g[mask])) / m.n)


def mistreatment_closed_form(m: MarginSet, definition, s: Surrogate) -> float:
    """(2/N^2)(N_minus * sum_{S,z=+1} phi(g) - N_plus * sum_{S,z=-1} phi(g)), row by row."""
    n_plus, n_minus = m.group_sizes()
    g, mask = _proxy_terms(m, definition)
    phi = s(g)
    sum_plus = 0.0
    sum_minus = 0.0
    for value, zi, keep in zip(phi.tolist(), m.sensitive.tolist(), mask.tolist()):
        if not keep:
            continue
        if zi == 1:
            sum_plus += value
        else:
            sum_minus += value
    return 2.0 / m.n ** 2 * (n_minus * sum_plus - n_plus * sum_minus)


def mistreatment_theorem_form(m: MarginSet, definition) -> float:
    """Linear-surrogate proxy written as sums of |d| over confusion cells."""
    definition = MistreatmentDefinition(definition)
    n_plus, n_minus = m.group_sizes()
    _proxy_terms(m, definition)
    y = m.labels
    pos = m.margins > 0
    D = np.abs(m.margins)
    tp, fn = (y == 1) & pos, (y == 1) & ~pos
    fp, tn = (y == 0) & pos, (y == 0) & ~pos

    def cell_sum(group_mask):
        if definition is MistreatmentDefinition.OMR:
            return -np.sum(D[group_mask & (fp | fn)])
        if definition is MistreatmentDefinition.FPR:
            return -np.sum(D[group_mask & fp])
        if definition is MistreatmentDefinition.FNR:
            return -np.sum(D[group_mask & fn])
        if definition is MistreatmentDefinition.BALANCE_POS:
            return np.sum(D[group_mask & tp]) - np.sum(D[group_mask & fn])
        return np.sum(D[group_mask & fp]) - np.sum(D[group_mask & tn])

    t_plus = cell_sum(m.protected)
    t_minus = cell_sum(m.unprotected)
    return float(2.0 / m.n ** 2 * (n_minus * t_plus - n_plus * t_minus))


def confusion_by_group(m: MarginSet) -> ConfusionByGroup:
    if m.labels is None:
        raise DomainError("labels are required for the confusion matrix")
    y = m.labels
    pos = m.margins > 0

    def count(group_mask, label, predicted):
        return int(np.sum(group_mask & (y == label) & (pos == predicted)))

    a, b = m.protected, m.unprotected
    return ConfusionByGroup(
        tp_plus=count(a, 1, True), tn_plus=count(a, 0, False),
        fp_plus=count(a, 0, True), fn_plus=count(a, 1, False),
        tp_minus=count(b, 1, True), tn_minus=count(b, 0, False),
        fp_minus=count(b, 0, True), fn_minus=count(b, 1, False),
    )
