"""
Experiment orchestration behind the command-line subcommands.

Every cmd_* function returns a status dictionary in the shape
{"status": "success" | "violation" | "error", ...}; library errors are
caught here and reported with their type and the process exit code.
"""
import functools
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import fsspec
import numpy as np
import pandas as pd

from . import balanced as balanced_mod
from .balanced import BalancedConfig
from .dataset import (
    DatasetSchema,
    ResampleMode,
    SplitSpec,
    load_csv,
    read_raw_table,
    resample_balanced,
    save_recipe,
    split_and_standardize,
)
from .errors import EXIT_OK, EXIT_VERIFICATION, ConfigError, FairgapError, exit_code_for
from .metrics import (
    accuracy,
    cov_hat,
    ddp_hat,
    ddp_tilde,
    gap,
    group_counts,
    large_margin_stats,
    margins,
)
from .reporting import aggregate, join, list_json, read_json, write_csv, write_json
from .surrogates import (
    SURROGATE_ALIASES,
    GroupSplitSurrogate,
    Surrogate,
    SurrogateKind,
    all_surrogates,
    gap_curve,
    general_sigmoid,
    parse_surrogate,
)
from .trainer import PenaltyMode, TrainConfig, train
from .verify import TrialConfig, run_all

logger = logging.getLogger(__name__)

UNCONSTRAINED = "unconstrained"
REPORT_METRICS = ["accuracy", "abs_ddp_hat", "ddp_tilde", "cov_hat", "gap", "large_margin_rate"]
GROUP_KEYS = {
    "train": ["dataset", "surrogate"],
    "balanced": ["dataset", "surrogate"],
    "resample": ["dataset", "surrogate", "mode"],
}


@dataclass(frozen=True)
class BoxplotConfig:
    constrained_rho: float = 5.0
    normalize: bool = False
    w: float = 4.0
    train_fraction: float = 0.70


@dataclass(frozen=True)
class ResampleConfig:
    modes: tuple = ("downsample_majority", "upsample_minority_full")
    surrogates: tuple = ("linear", "general-sigmoid")
    rho: float = 1.0
    w: float = 4.0
    train_fraction: float = 0.70

    def __post_init__(self):
        for mode in self.modes:
            ResampleMode(mode)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "dataset"
    dataset: Optional[str] = None
    schema: Optional[str] = None
    split: SplitSpec = field(default_factory=SplitSpec)
    surrogates: tuple = (UNCONSTRAINED, "linear", "hinge", "sigmoid", "log-sigmoid", "general-sigmoid")
    balanced_surrogates: tuple = ("linear", "hinge", "sigmoid", "log-sigmoid", "general-sigmoid")
    rho_grid: tuple = (0.1, 0.5, 1.0, 2.0, 5.0)
    w_grid: tuple = (1.0, 2.0, 4.0, 8.0, 16.0)
    seeds: tuple = tuple(range(10))
    train: TrainConfig = field(default_factory=TrainConfig)
    balanced: BalancedConfig = field(default_factory=BalancedConfig)
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    boxplot: BoxplotConfig = field(default_factory=BoxplotConfig)
    verify: TrialConfig = field(default_factory=TrialConfig)
    output_dir: str = "results"
    jobs: int = 1
    selection_max_accuracy_drop: Optional[float] = None

    def __post_init__(self):
        if not self.surrogates or not self.rho_grid or not self.w_grid or not self.seeds:
            raise ConfigError("surrogate list, rho grid, w grid and seed list must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {list(self.seeds)}")
        if any(r < 0 for r in self.rho_grid) or any(w <= 0 for w in self.w_grid):
            raise ConfigError("rho grid must be >= 0 and w grid > 0")
        if int(self.jobs) < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs!r}")
        for name in tuple(self.surrogates) + tuple(self.balanced_surrogates) + tuple(self.resample.surrogates):
            _base_kind(name)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Optional[str] = None) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}. Available: {sorted(known)}")

        def resolve(path):
            if path is None or base_dir is None or "://" in str(path) or os.path.isabs(str(path)):
                return path
            return os.path.normpath(os.path.join(base_dir, str(path)))

        try:
            return cls(
                name=doc.get("name", "dataset"),
                dataset=resolve(doc.get("dataset")),
                schema=resolve(doc.get("schema")),
                split=SplitSpec.from_dict(doc.get("split", {})),
                surrogates=tuple(doc.get("surrogates", cls.surrogates)),
                balanced_surrogates=tuple(doc.get("balanced_surrogates", cls.balanced_surrogates)),
                rho_grid=tuple(float(r) for r in doc.get("rho_grid", cls.rho_grid)),
                w_grid=tuple(float(w) for w in doc.get("w_grid", cls.w_grid)),
                seeds=tuple(int(s) for s in doc.get("seeds", cls.seeds)),
                train=TrainConfig.from_dict(doc.get("train", {})),
                balanced=BalancedConfig.from_dict(doc.get("balanced", {})),
                resample=ResampleConfig(**_tupled(doc.get("resample", {}), ("modes", "surrogates"))),
                boxplot=BoxplotConfig(**doc.get("boxplot", {})),
                verify=TrialConfig.from_dict(doc.get("verify", {})),
                output_dir=doc.get("output_dir", "results"),
                jobs=int(doc.get("jobs", 1)),
                selection_max_accuracy_drop=doc.get("selection_max_accuracy_drop"),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid experiment config: {e}")

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with fsspec.open(str(path), "r") as f:
                doc = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        logger.info(f"📂 Loaded experiment config {path}")
        return cls.from_dict(doc, base_dir=os.path.dirname(os.path.abspath(str(path))))

    def with_overrides(self, seed=None, surrogate=None, rho=None, mode=None, jobs=None, out=None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seeds=(int(seed),), verify=replace(cfg.verify, seed=int(seed)))
        if surrogate is not None:
            names = (surrogate,)
            cfg = replace(cfg, surrogates=names, balanced_surrogates=names,
                          resample=replace(cfg.resample, surrogates=names))
        if rho is not None:
            cfg = replace(cfg, rho_grid=(float(rho),), resample=replace(cfg.resample, rho=float(rho)))
        if mode is not None:
            cfg = replace(cfg, train=replace(cfg.train, penalty_mode=PenaltyMode(mode)))
        if jobs is not None:
            cfg = replace(cfg, jobs=int(jobs))
        if out is not None:
            cfg = replace(cfg, output_dir=str(out))
        return cfg

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dataset": self.dataset,
            "schema": self.schema,
            "split": self.split.to_dict(),
            "surrogates": list(self.surrogates),
            "balanced_surrogates": list(self.balanced_surrogates),
            "rho_grid": list(self.rho_grid),
            "w_grid": list(self.w_grid),
            "seeds": list(self.seeds),
            "train": self.train.to_dict(),
            "balanced": self.balanced.to_dict(),
            "resample": {**self.resample.__dict__, "modes": list(self.resample.modes),
                         "surrogates": list(self.resample.surrogates)},
            "boxplot": dict(self.boxplot.__dict__),
            "verify": self.verify.to_dict(),
            "output_dir": self.output_dir,
            "jobs": self.jobs,
            "selection_max_accuracy_drop": self.selection_max_accuracy_drop,
        }


def _tupled(doc: dict, keys) -> dict:
    return {k: tuple(v) if k in keys else v for k, v in doc.items()}


@dataclass(frozen=True)
class FairnessReport:
    split: str
    accuracy: float
    abs_ddp_hat: float
    ddp_hat: float
    ddp_tilde: float
    cov_hat: float
    gap: float
    large_margin_rate: float
    seed: int
    surrogate: str
    rho: float = 0.0
    w: Optional[float] = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Candidate:
    surrogate: Surrogate
    rho: float
    w: Optional[float] = None


def _base_kind(name: str):
    if name == UNCONSTRAINED:
        return None
    base = name.split(":", 1)[0].strip().lower()
    if base not in SURROGATE_ALIASES:
        raise ConfigError(f"unknown surrogate '{name}'. Available: {[UNCONSTRAINED] + sorted({k.value for k in SurrogateKind})}")
    return SURROGATE_ALIASES[base]


def candidates(name: str, cfg: ExperimentConfig) -> list:
    """Hyperparameter candidates for one surrogate row."""
    kind = _base_kind(name)
    if kind is None:
        return [Candidate(Surrogate(SurrogateKind.LINEAR), 0.0)]
    if kind is SurrogateKind.GENERAL_SIGMOID and ":" not in name:
        return [Candidate(general_sigmoid(w), rho, w) for w in cfg.w_grid for rho in cfg.rho_grid]
    s = parse_surrogate(name)
    return [Candidate(s, rho, s.w) for rho in cfg.rho_grid]


def _row_surrogate(name: str, w: float) -> Surrogate:
    kind = _base_kind(name)
    if kind is None:
        return Surrogate(SurrogateKind.LINEAR)
    if kind is SurrogateKind.GENERAL_SIGMOID and ":" not in name:
        return general_sigmoid(w)
    return parse_surrogate(name)


def _safe(name: str) -> str:
    return name.replace(":", "_").replace("=", "").replace(",", "_")


def fairness_report(model, data, s, split: str, seed: int, label: str, rho: float = 0.0,
                    w: Optional[float] = None, echo: Optional[dict] = None) -> FairnessReport:
    m = margins(model, data)
    dhat = ddp_hat(group_counts(m))
    return FairnessReport(
        split=split,
        accuracy=accuracy(m),
        abs_ddp_hat=abs(dhat),
        ddp_hat=dhat,
        ddp_tilde=ddp_tilde(m, s),
        cov_hat=cov_hat(m, s),
        gap=gap(m, s),
        large_margin_rate=large_margin_stats(m).overall_rate,
        seed=seed,
        surrogate=label,
        rho=rho,
        w=w,
        config=echo or {},
    )


def select(evaluations: list, baseline_accuracy: Optional[float], max_drop: Optional[float]) -> int:
    """
    Index of the candidate with the smallest validation |DDP|, ties broken by
    higher validation accuracy. Candidates losing more than max_drop accuracy
    against the unconstrained baseline are skipped unless none remain.
    """
    indices = list(range(len(evaluations)))
    if max_drop is not None and baseline_accuracy is not None:
        eligible = [i for i in indices if evaluations[i].accuracy >= baseline_accuracy - max_drop]
        if eligible:
            indices = eligible
        else:
            logger.warning("⚠️ No candidate within the accuracy-drop limit; selecting among all")
    return min(indices, key=lambda i: (evaluations[i].abs_ddp_hat, -evaluations[i].accuracy, i))


# ---------- Shared plumbing ----------

def _as_status(fn: Callable) -> Callable:
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FairgapError, FileNotFoundError) as e:
            logger.error(f"❌ {fn.__name__} failed: {e}")
            return {
                "status": "error",
                "error": str(e),
                "error_type": type(e).__name__,
                "exit_code": exit_code_for(e),
            }
    return wrapper


def _inputs(cfg: ExperimentConfig) -> tuple:
    if not cfg.dataset or not cfg.schema:
        raise ConfigError("this command needs 'dataset' and 'schema' in the config")
    schema = DatasetSchema.load(cfg.schema)
    return schema, read_raw_table(cfg.dataset, schema.delimiter)


def _three_way(cfg, schema, table, seed):
    train_d, val_d, test_d, _ = split_and_standardize(table, schema, spec=replace(cfg.split, seed=seed))
    return train_d, val_d, test_d


def _two_way(schema, table, fraction, seed):
    train_d, test_d, _ = split_and_standardize(table, schema, train_fraction=fraction, seed=seed)
    return train_d, test_d


def _run_cells(cfg: ExperimentConfig, cells: list, fn: Callable) -> list:
    """Run independent cells; results come back in submission order."""
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(fn, *cell) for cell in cells]
        return [f.result() for f in futures]


def aggregate_docs(kind: str, docs: list) -> pd.DataFrame:
    keys = GROUP_KEYS[kind]
    rows = [{**{k: d[k] for k in keys}, **{m: d["test"][m] for m in REPORT_METRICS}} for d in docs]
    return aggregate(rows, keys, REPORT_METRICS)


def _write_docs(cfg: ExperimentConfig, kind: str, docs: list, path_of: Callable) -> list:
    paths = []
    for doc in docs:
        path = join(cfg.output_dir, kind, path_of(doc))
        write_json(path, doc)
        paths.append(path)
    return paths


def _fit_selected(cfg, train_d, val_d, name, seed, runner):
    """Fit every candidate with `runner`, select on validation."""
    tcfg = replace(cfg.train, seed=seed)
    baseline = None
    if cfg.selection_max_accuracy_drop is not None:
        base_model = train(train_d, Surrogate(SurrogateKind.LINEAR), tcfg.with_rho(0.0)).model
        baseline = accuracy(margins(base_model, val_d))

    fitted, evaluations = [], []
    for cand in candidates(name, cfg):
        model, s_eval, extra = runner(cand, tcfg.with_rho(cand.rho))
        fitted.append((cand, model, s_eval, extra))
        evaluations.append(fairness_report(model, val_d, s_eval, "validation", seed, name, cand.rho, cand.w))
    best = select(evaluations, baseline, cfg.selection_max_accuracy_drop)
    summary = [{"rho": e.rho, "w": e.w, "accuracy": e.accuracy, "abs_ddp_hat": e.abs_ddp_hat} for e in evaluations]
    return fitted[best], evaluations[best], summary, baseline


# ---------- Commands ----------

@_as_status
def cmd_ingest(cfg: ExperimentConfig) -> dict:
    if not cfg.dataset or not cfg.schema:
        raise ConfigError("ingest needs 'dataset' and 'schema' in the config")
    schema = DatasetSchema.load(cfg.schema)
    data = load_csv(cfg.dataset, schema)
    summary = {**data.summary(), "feature_names": data.feature_names, "schema": schema.to_dict()}
    summary_path = join(cfg.output_dir, "ingest", "summary.json")
    recipe_path = join(cfg.output_dir, "ingest", "recipe.json")
    write_json(summary_path, summary)
    save_recipe(data.recipe, recipe_path)
    return {"status": "success", "summary": data.summary(), "outputs": [summary_path, recipe_path]}


def _train_cell(cfg, schema, table, name, seed) -> dict:
    train_d, val_d, test_d = _three_way(cfg, schema, table, seed)

    def runner(cand, tcfg):
        result = train(train_d, cand.surrogate, tcfg)
        return result.model, cand.surrogate, result.to_dict()

    (cand, model, s_eval, fit), _, summary, baseline = _fit_selected(cfg, train_d, val_d, name, seed, runner)
    test = fairness_report(model, test_d, s_eval, "test", seed, name, cand.rho, cand.w, cfg.train.to_dict())
    return {
        "dataset": cfg.name,
        "surrogate": name,
        "seed": seed,
        "selected": {"rho": cand.rho, "w": cand.w, "surrogate": cand.surrogate.name},
        "baseline_validation_accuracy": baseline,
        "candidates": summary,
        "test": test.to_dict(),
        "fit": fit,
    }


@_as_status
def cmd_train(cfg: ExperimentConfig) -> dict:
    schema, table = _inputs(cfg)
    cells = [(cfg, schema, table, name, seed) for name in cfg.surrogates for seed in cfg.seeds]
    logger.info(f"🔄 Training {len(cells)} (surrogate, seed) cells with jobs={cfg.jobs}")
    docs = _run_cells(cfg, cells, _train_cell)
    outputs = _write_docs(cfg, "train", docs, lambda d: f"{_safe(d['surrogate'])}/seed_{d['seed']}.json")

    table_out = aggregate_docs("train", docs)
    agg_path = join(cfg.output_dir, "train", "aggregate.csv")
    write_csv(agg_path, table_out)
    return {"status": "success", "reports": len(docs), "aggregate": agg_path, "outputs": outputs + [agg_path]}


def _boxplot_cell(cfg, schema, table, seed) -> dict:
    bp = cfg.boxplot
    train_d, test_d = _two_way(schema, table, bp.train_fraction, seed)
    linear = Surrogate(SurrogateKind.LINEAR)
    G = general_sigmoid(bp.w)
    tcfg = replace(cfg.train, seed=seed)
    variants = {UNCONSTRAINED: tcfg.with_rho(0.0), "linear": tcfg.with_rho(bp.constrained_rho)}
    cell_rows, overall_rows = [], []
    for variant, vcfg in variants.items():
        model = train(train_d, linear, vcfg).model
        m = margins(model, test_d, normalize=bp.normalize)
        for space, stats in (("margin", large_margin_stats(m)), ("general-sigmoid", large_margin_stats(m, G(m.margins)))):
            frame = stats.to_frame()
            frame.insert(0, "space", space)
            frame.insert(0, "seed", seed)
            frame.insert(0, "variant", variant)
            frame["rate"] = [c.rate for c in stats.cells]
            cell_rows.append(frame)
            overall_rows.append({"variant": variant, "seed": seed, "space": space, "n": stats.n,
                                 "n_outliers": stats.n_outliers, "overall_rate": stats.overall_rate})
    return {"cells": pd.concat(cell_rows, ignore_index=True), "overall": overall_rows}


@_as_status
def cmd_boxplot(cfg: ExperimentConfig) -> dict:
    schema, table = _inputs(cfg)
    results = _run_cells(cfg, [(cfg, schema, table, seed) for seed in cfg.seeds], _boxplot_cell)
    cells = pd.concat([r["cells"] for r in results], ignore_index=True)
    overall = pd.DataFrame([row for r in results for row in r["overall"]])
    cells_path = join(cfg.output_dir, "boxplot", "cells.csv")
    overall_path = join(cfg.output_dir, "boxplot", "overall.csv")
    write_csv(cells_path, cells)
    write_csv(overall_path, overall)
    margin_rates = overall[overall["space"] == "margin"].groupby("variant")["overall_rate"].mean()
    for variant, rate in margin_rates.items():
        logger.info(f"📊 {cfg.name} {variant}: large-margin rate {100 * rate:.2f}%")
    return {"status": "success", "rates": margin_rates.to_dict(), "outputs": [cells_path, overall_path]}


def _resample_cell(cfg, schema, table, seed) -> list:
    rs = cfg.resample
    train_d, test_d = _two_way(schema, table, rs.train_fraction, seed)
    tcfg = replace(cfg.train, seed=seed).with_rho(rs.rho)
    sets = {"original": train_d}
    for mode in rs.modes:
        sets[mode] = resample_balanced(train_d, mode, seed)
    docs = []
    for name in rs.surrogates:
        s = _row_surrogate(name, rs.w)
        rho = 0.0 if name == UNCONSTRAINED else rs.rho
        for mode, data in sets.items():
            model = train(data, s, tcfg.with_rho(rho)).model
            test = fairness_report(model, test_d, s, "test", seed, name, rho, s.w, cfg.train.to_dict())
            na, nb = data.group_sizes()
            docs.append({"dataset": cfg.name, "surrogate": name, "mode": mode, "seed": seed,
                         "train_group_sizes": [na, nb], "test": test.to_dict()})
    return docs


@_as_status
def cmd_resample(cfg: ExperimentConfig) -> dict:
    schema, table = _inputs(cfg)
    results = _run_cells(cfg, [(cfg, schema, table, seed) for seed in cfg.seeds], _resample_cell)
    docs = [d for r in results for d in r]
    outputs = _write_docs(cfg, "resample", docs,
                          lambda d: f"{_safe(d['surrogate'])}/{d['mode']}/seed_{d['seed']}.json")
    comparison = aggregate_docs("resample", docs)
    path = join(cfg.output_dir, "resample", "comparison.csv")
    write_csv(path, comparison)
    return {"status": "success", "reports": len(docs), "comparison": path, "outputs": outputs + [path]}


def _balanced_cell(cfg, schema, table, name, seed) -> dict:
    train_d, val_d, test_d = _three_way(cfg, schema, table, seed)

    def runner(cand, tcfg):
        result = balanced_mod.run(train_d, cand.surrogate, cfg.balanced, tcfg)
        lam = result.lambda_trace[-1]
        return result.model, GroupSplitSurrogate(cand.surrogate, lam), result.to_dict()

    (cand, model, s_eval, run_doc), _, summary, baseline = _fit_selected(cfg, train_d, val_d, name, seed, runner)
    label = f"b-{name}"
    test = fairness_report(model, test_d, s_eval, "test", seed, label, cand.rho, cand.w, cfg.balanced.to_dict())

    tcfg = replace(cfg.train, seed=seed).with_rho(cand.rho)
    plain_model = train(train_d, cand.surrogate, tcfg).model
    plain = fairness_report(plain_model, test_d, cand.surrogate, "test", seed, name, cand.rho, cand.w)
    return {
        "dataset": cfg.name,
        "surrogate": label,
        "seed": seed,
        "selected": {"rho": cand.rho, "w": cand.w, "surrogate": cand.surrogate.name},
        "baseline_validation_accuracy": baseline,
        "candidates": summary,
        "balanced": run_doc,
        "test": test.to_dict(),
        "plain_test": plain.to_dict(),
    }


@_as_status
def cmd_balanced(cfg: ExperimentConfig) -> dict:
    schema, table = _inputs(cfg)
    cells = [(cfg, schema, table, name, seed) for name in cfg.balanced_surrogates for seed in cfg.seeds]
    logger.info(f"🔄 Balanced surrogates: {len(cells)} cells with jobs={cfg.jobs}")
    docs = _run_cells(cfg, cells, _balanced_cell)
    outputs = _write_docs(cfg, "balanced", docs, lambda d: f"{_safe(d['surrogate'])}/seed_{d['seed']}.json")

    arrows = pd.DataFrame([{
        "dataset": d["dataset"],
        "surrogate": d["plain_test"]["surrogate"],
        "seed": d["seed"],
        "plain_accuracy": d["plain_test"]["accuracy"],
        "plain_abs_ddp_hat": d["plain_test"]["abs_ddp_hat"],
        "balanced_accuracy": d["test"]["accuracy"],
        "balanced_abs_ddp_hat": d["test"]["abs_ddp_hat"],
        "final_lambda": d["balanced"]["lambda_trace"][-1],
        "terminated_by": d["balanced"]["terminated_by"],
    } for d in docs])
    arrows_path = join(cfg.output_dir, "balanced", "arrows.csv")
    agg_path = join(cfg.output_dir, "balanced", "aggregate.csv")
    write_csv(arrows_path, arrows)
    write_csv(agg_path, aggregate_docs("balanced", docs))
    return {"status": "success", "reports": len(docs), "outputs": outputs + [arrows_path, agg_path]}


@_as_status
def cmd_verify(cfg: ExperimentConfig, surrogate_eval: Optional[Callable] = None, only: Optional[list] = None) -> dict:
    report = run_all(cfg.verify, surrogate_eval=surrogate_eval, jobs=cfg.jobs, only=only)
    path = join(cfg.output_dir, "verify", "report.json")
    write_json(path, report.to_dict())
    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        logger.error(f"❌ Verification failed: {failed}")
    return {
        "status": "success" if report.passed else "violation",
        "exit_code": EXIT_OK if report.passed else EXIT_VERIFICATION,
        "violations": report.violations,
        "failed_checks": failed,
        "outputs": [path],
    }


@_as_status
def cmd_report(cfg: ExperimentConfig) -> dict:
    """Re-aggregate every per-seed JSON under the output directory."""
    outputs = []
    counts = {}
    for kind in GROUP_KEYS:
        paths = list_json(join(cfg.output_dir, kind))
        docs = [read_json(p) for p in paths]
        docs = [d for d in docs if "test" in d]
        counts[kind] = len(docs)
        if not docs:
            continue
        name = "comparison.csv" if kind == "resample" else "aggregate.csv"
        path = join(cfg.output_dir, kind, name)
        write_csv(path, aggregate_docs(kind, docs))
        outputs.append(path)
    if not outputs:
        logger.warning(f"⚠️ No per-seed reports found under {cfg.output_dir}")
    return {"status": "success", "reports": counts, "outputs": outputs}


@_as_status
def cmd_gap_curve(cfg: ExperimentConfig, lo: float = -5.0, hi: float = 5.0, points: int = 201,
                  w: Optional[float] = None) -> dict:
    if not lo < hi or points < 2:
        raise ConfigError(f"need lo < hi and points >= 2, got [{lo}, {hi}] with {points} points")
    xs = np.linspace(lo, hi, int(points))
    frame = pd.DataFrame({"x": xs})
    for s in all_surrogates(w=cfg.boxplot.w if w is None else w):
        frame[s.name] = gap_curve(s, xs)
    path = join(cfg.output_dir, "gap_curve.csv")
    write_csv(path, frame)
    return {"status": "success", "outputs": [path]}


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "boxplot": cmd_boxplot,
    "resample": cmd_resample,
    "balanced": cmd_balanced,
    "verify": cmd_verify,
    "report": cmd_report,
    "gap-curve": cmd_gap_curve,
}
