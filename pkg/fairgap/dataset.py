"""Tabular ingestion, preprocessing, splitting and group resampling."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import fsspec
import numpy as np
import pandas as pd

from .errors import ConfigError, DegenerateColumnError, GroupError, SchemaError, SplitError

logger = logging.getLogger(__name__)

DEFAULT_MISSING_VALUES = ("", "?")


@dataclass(frozen=True)
class RawTable:
    header: list
    frame: pd.DataFrame

    def __post_init__(self):
        if len(self.header) < 2:
            raise SchemaError(f"table needs at least 2 columns, found {len(self.header)}")
        if list(self.frame.columns) != list(self.header):
            raise SchemaError("frame columns do not match header")

    @property
    def rows(self) -> list:
        return self.frame.values.tolist()


@dataclass(frozen=True)
class DatasetSchema:
    label_column: str
    positive_label_values: frozenset
    sensitive_column: str
    protected_value: Optional[str] = None
    numeric_columns: tuple = ()
    categorical_columns: tuple = ()
    include_sensitive_as_feature: bool = False
    missing_values: tuple = DEFAULT_MISSING_VALUES
    sensitive_range: Optional[tuple] = None
    sensitive_keep_values: Optional[tuple] = None
    delimiter: str = ","

    def __post_init__(self):
        numeric = set(self.numeric_columns)
        categorical = set(self.categorical_columns)
        if self.protected_value is None and self.sensitive_range is None:
            raise SchemaError("schema needs protected_value or sensitive_range")
        if self.label_column in numeric | categorical or self.label_column == self.sensitive_column:
            raise SchemaError(f"label column '{self.label_column}' may not be a feature or the sensitive column")
        if numeric & categorical:
            raise SchemaError(f"columns both numeric and categorical: {sorted(numeric & categorical)}")
        if self.sensitive_column in numeric | categorical and not self.include_sensitive_as_feature:
            raise SchemaError(
                f"sensitive column '{self.sensitive_column}' listed as a feature but include_sensitive_as_feature is false"
            )
        if len(set(self.numeric_columns)) != len(self.numeric_columns) or len(categorical) != len(self.categorical_columns):
            raise SchemaError("duplicate feature column names")
        if self.sensitive_range is not None:
            lo, hi = self.sensitive_range
            if not lo <= hi:
                raise SchemaError(f"sensitive_range must satisfy lo <= hi, got {self.sensitive_range}")

    @property
    def feature_columns(self) -> list:
        return list(self.numeric_columns) + list(self.categorical_columns)

    @property
    def appends_sensitive(self) -> bool:
        """True when z itself is appended as a +1/-1 feature column."""
        return self.include_sensitive_as_feature and self.sensitive_column not in self.feature_columns

    @property
    def required_columns(self) -> list:
        cols = [self.label_column, self.sensitive_column] + self.feature_columns
        return list(dict.fromkeys(cols))

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetSchema":
        try:
            rng = doc.get("sensitive_range")
            keep = doc.get("sensitive_keep_values")
            return cls(
                label_column=doc["label_column"],
                positive_label_values=frozenset(str(v).strip() for v in doc["positive_label_values"]),
                sensitive_column=doc["sensitive_column"],
                protected_value=None if doc.get("protected_value") is None else str(doc["protected_value"]).strip(),
                numeric_columns=tuple(doc.get("numeric_columns", ())),
                categorical_columns=tuple(doc.get("categorical_columns", ())),
                include_sensitive_as_feature=bool(doc.get("include_sensitive_as_feature", False)),
                missing_values=tuple(doc.get("missing_values", DEFAULT_MISSING_VALUES)),
                sensitive_range=None if rng is None else (float(rng[0]), float(rng[1])),
                sensitive_keep_values=None if keep is None else tuple(str(v).strip() for v in keep),
                delimiter=doc.get("delimiter", ","),
            )
        except KeyError as e:
            raise SchemaError(f"schema document missing field {e}")

    @classmethod
    def load(cls, path) -> "DatasetSchema":
        with fsspec.open(str(path), "r") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        return {
            "label_column": self.label_column,
            "positive_label_values": sorted(self.positive_label_values),
            "sensitive_column": self.sensitive_column,
            "protected_value": self.protected_value,
            "numeric_columns": list(self.numeric_columns),
            "categorical_columns": list(self.categorical_columns),
            "include_sensitive_as_feature": self.include_sensitive_as_feature,
            "missing_values": list(self.missing_values),
            "sensitive_range": None if self.sensitive_range is None else list(self.sensitive_range),
            "sensitive_keep_values": None if self.sensitive_keep_values is None else list(self.sensitive_keep_values),
            "delimiter": self.delimiter,
        }


@dataclass(frozen=True)
class PreprocessRecipe:
    numeric_means: dict
    numeric_stds: dict
    categories: dict
    feature_names: list

    def to_dict(self) -> dict:
        return {
            "numeric_means": self.numeric_means,
            "numeric_stds": self.numeric_stds,
            "categories": self.categories,
            "feature_names": self.feature_names,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PreprocessRecipe":
        return cls(
            numeric_means={k: float(v) for k, v in doc["numeric_means"].items()},
            numeric_stds={k: float(v) for k, v in doc["numeric_stds"].items()},
            categories={k: list(v) for k, v in doc["categories"].items()},
            feature_names=list(doc["feature_names"]),
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    feature_names: list
    source: str = ""
    dropped_rows: int = 0
    recipe: Optional[PreprocessRecipe] = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels).astype(int)
        z = np.asarray(self.sensitive).astype(int)
        if x.ndim != 2:
            raise SchemaError(f"features must be a 2-d matrix, got shape {x.shape}")
        n = x.shape[0]
        if y.shape != (n,) or z.shape != (n,):
            raise SchemaError("features, labels and sensitive must have the same number of rows")
        if len(self.feature_names) != x.shape[1]:
            raise SchemaError(f"{len(self.feature_names)} feature names for {x.shape[1]} columns")
        if not np.all(np.isfinite(x)):
            raise SchemaError("features contain missing or non-finite values")
        if not np.all(np.isin(y, (0, 1))):
            raise SchemaError("labels must be 0 or 1")
        if not np.all(np.isin(z, (-1, 1))):
            raise SchemaError("sensitive values must be -1 or +1")
        if n < 2:
            raise GroupError(f"dataset needs at least 2 rows, got {n}")
        if not (np.any(z == 1) and np.any(z == -1)):
            raise GroupError("both sensitive groups must be present")
        object.__setattr__(self, "features", _frozen(x))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "sensitive", _frozen(z))
        object.__setattr__(self, "feature_names", list(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def group_sizes(self) -> tuple:
        """(N_a, N_b): sizes of the z=+1 and z=-1 groups."""
        na = int(np.sum(self.sensitive == 1))
        return na, self.n - na

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive=self.sensitive[idx],
            feature_names=self.feature_names,
            source=self.source,
            dropped_rows=self.dropped_rows,
            recipe=self.recipe,
        )

    def summary(self) -> dict:
        na, nb = self.group_sizes()
        return {
            "source": self.source,
            "n": self.n,
            "d": self.d,
            "group_sizes": {"protected": na, "unprotected": nb},
            "positive_rate": float(self.labels.mean()),
            "dropped_rows": self.dropped_rows,
        }


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    validation_fraction: float = 0.05
    test_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train_fraction, self.validation_fraction, self.test_fraction)
        for name, frac in zip(("train", "validation", "test"), fractions):
            if not 0.0 < frac < 1.0:
                raise ConfigError(f"{name}_fraction must be in (0, 1), got {frac}")
        if abs(sum(fractions) - 1.0) > 1e-12:
            raise ConfigError(f"split fractions must sum to 1, got {sum(fractions)!r}")
        if int(self.seed) < 0:
            raise ConfigError("split seed must be unsigned")

    @classmethod
    def from_dict(cls, doc: dict, seed: Optional[int] = None) -> "SplitSpec":
        return cls(
            train_fraction=float(doc.get("train_fraction", 0.70)),
            validation_fraction=float(doc.get("validation_fraction", 0.05)),
            test_fraction=float(doc.get("test_fraction", 0.25)),
            seed=int(doc.get("seed", 0) if seed is None else seed),
        )

    def to_dict(self) -> dict:
        return {
            "train_fraction": self.train_fraction,
            "validation_fraction": self.validation_fraction,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
        }


class ResampleMode(str, Enum):
    DOWNSAMPLE_MAJORITY = "downsample_majority"
    UPSAMPLE_MINORITY_FULL = "upsample_minority_full"
    UPSAMPLE_MINORITY_ONE_EXTRA_COPY = "upsample_minority_one_extra_copy"


# ---------- Ingestion ----------

def read_raw_table(path, delimiter: str = ",") -> RawTable:
    """Read a delimited file with a header row, every cell as a string."""
    path = str(path)
    try:
        with fsspec.open(path, "r") as f:
            frame = pd.read_csv(f, sep=delimiter, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}")
    frame.columns = [str(c).strip() for c in frame.columns]
    frame = frame.apply(lambda col: col.str.strip())
    return RawTable(header=list(frame.columns), frame=frame)


def _clean_rows(table: RawTable, schema: DatasetSchema) -> tuple:
    frame = table.frame
    missing = [c for c in schema.required_columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns {missing}. Available: {list(frame.columns)}")
    frame = frame[schema.required_columns]

    if schema.sensitive_keep_values is not None:
        keep = frame[schema.sensitive_column].isin(schema.sensitive_keep_values)
        logger.info(f"📊 Keeping {int(keep.sum())}/{len(frame)} rows with {schema.sensitive_column} in {list(schema.sensitive_keep_values)}")
        frame = frame[keep]

    bad = frame.isin(list(schema.missing_values)).any(axis=1) | frame.isna().any(axis=1)
    dropped = int(bad.sum())
    if dropped:
        logger.warning(f"⚠️ Dropping {dropped} rows with missing cells")
    return frame[~bad].reset_index(drop=True), dropped


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    if values.isna().any():
        raise SchemaError(f"numeric column '{column}' has non-numeric cells")
    return values.to_numpy(dtype=float)


def fit_recipe(frame: pd.DataFrame, schema: DatasetSchema) -> PreprocessRecipe:
    """Standardization statistics and one-hot categories from the given rows."""
    means, stds, categories = {}, {}, {}
    names = []
    for col in schema.numeric_columns:
        values = _numeric(frame, col)
        std = float(np.std(values))
        if len(np.unique(values)) < 2 or std == 0.0:
            raise DegenerateColumnError(f"numeric column '{col}' has a single distinct value")
        means[col] = float(np.mean(values))
        stds[col] = std
        names.append(col)
    for col in schema.categorical_columns:
        levels = sorted(frame[col].unique().tolist())
        if len(levels) < 2:
            raise DegenerateColumnError(f"categorical column '{col}' has a single distinct value")
        categories[col] = levels
        names.extend(f"{col}={level}" for level in levels)
    if schema.appends_sensitive:
        names.append(schema.sensitive_column)
    return PreprocessRecipe(numeric_means=means, numeric_stds=stds, categories=categories, feature_names=names)


def _map_labels(frame: pd.DataFrame, schema: DatasetSchema) -> np.ndarray:
    # Adult's test file writes labels as ">50K."
    raw = frame[schema.label_column].str.rstrip(".")
    positives = {v.rstrip(".") for v in schema.positive_label_values}
    return raw.isin(positives).to_numpy().astype(int)


def _map_sensitive(frame: pd.DataFrame, schema: DatasetSchema) -> np.ndarray:
    col = frame[schema.sensitive_column]
    if schema.sensitive_range is not None:
        lo, hi = schema.sensitive_range
        values = _numeric(frame, schema.sensitive_column)
        protected = (values >= lo) & (values <= hi)
    else:
        protected = (col == schema.protected_value).to_numpy()
    return np.where(protected, 1, -1)


def apply_recipe(frame: pd.DataFrame, schema: DatasetSchema, recipe: PreprocessRecipe,
                 source: str = "", dropped_rows: int = 0) -> Dataset:
    blocks = []
    for col in schema.numeric_columns:
        values = _numeric(frame, col)
        blocks.append(((values - recipe.numeric_means[col]) / recipe.numeric_stds[col])[:, None])
    for col in schema.categorical_columns:
        levels = recipe.categories[col]
        cat = pd.Categorical(frame[col], categories=levels)
        # unseen levels get code -1 and encode as all zeros
        onehot = np.zeros((len(frame), len(levels)))
        codes = cat.codes
        rows = np.nonzero(codes >= 0)[0]
        onehot[rows, codes[rows]] = 1.0
        blocks.append(onehot)
    sensitive = _map_sensitive(frame, schema)
    if schema.appends_sensitive:
        blocks.append(sensitive[:, None].astype(float))
    features = np.hstack(blocks) if blocks else np.zeros((len(frame), 0))

    labels = _map_labels(frame, schema)
    if not np.any(sensitive == 1) or not np.any(sensitive == -1):
        raise GroupError(f"a sensitive group is empty after filtering ({source or 'table'})")
    return Dataset(
        features=features,
        labels=labels,
        sensitive=sensitive,
        feature_names=recipe.feature_names,
        source=source,
        dropped_rows=dropped_rows,
        recipe=recipe,
    )


def load_csv(path, schema: DatasetSchema, recipe: Optional[PreprocessRecipe] = None) -> Dataset:
    """Load, clean and encode a CSV; fits the recipe on the loaded rows unless one is given."""
    table = read_raw_table(path, schema.delimiter)
    frame, dropped = _clean_rows(table, schema)
    if frame.empty:
        raise GroupError(f"no rows left in {path} after dropping missing cells")
    if recipe is None:
        recipe = fit_recipe(frame, schema)
    data = apply_recipe(frame, schema, recipe, source=str(path), dropped_rows=dropped)
    na, nb = data.group_sizes()
    logger.info(f"✅ Loaded {path}: N={data.n}, d={data.d}, groups {na}/{nb}, dropped {dropped}")
    return data


def save_recipe(recipe: PreprocessRecipe, path) -> None:
    with fsspec.open(str(path), "w") as f:
        json.dump(recipe.to_dict(), f, indent=2)


def load_recipe(path) -> PreprocessRecipe:
    with fsspec.open(str(path), "r") as f:
        return PreprocessRecipe.from_dict(json.load(f))


# ---------- Splitting ----------

def _split_sizes(n: int, fractions: Sequence[float]) -> list:
    sizes = [int(math.floor(n * f + 1e-9)) for f in fractions]
    # remainder goes to the largest fractions first, ties by position
    order = sorted(range(len(fractions)), key=lambda i: (-fractions[i], i))
    i = 0
    while sum(sizes) < n:
        sizes[order[i % len(order)]] += 1
        i += 1
    return sizes


def partition_indices(n: int, fractions: Sequence[float], seed: int) -> list:
    if n * min(fractions) < 1:
        raise ConfigError(f"N={n} is too small for split fractions {list(fractions)}")
    perm = np.random.default_rng(seed).permutation(n)
    sizes = _split_sizes(n, fractions)
    bounds = np.cumsum([0] + sizes)
    return [np.sort(perm[bounds[i]:bounds[i + 1]]) for i in range(len(sizes))]


def _check_groups(name: str, sensitive: np.ndarray) -> None:
    if not np.any(sensitive == 1):
        raise SplitError(name, "no member of the protected group (z=+1)")
    if not np.any(sensitive == -1):
        raise SplitError(name, "no member of the unprotected group (z=-1)")


def split(data: Dataset, spec: SplitSpec) -> tuple:
    """Seeded (train, validation, test) partition; every split keeps both groups."""
    fractions = (spec.train_fraction, spec.validation_fraction, spec.test_fraction)
    parts = partition_indices(data.n, fractions, spec.seed)
    for name, idx in zip(("train", "validation", "test"), parts):
        _check_groups(name, data.sensitive[idx])
    return tuple(data.take(idx) for idx in parts)


def train_test_split(data: Dataset, train_fraction: float = 0.70, seed: int = 0) -> tuple:
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    parts = partition_indices(data.n, (train_fraction, 1.0 - train_fraction), seed)
    for name, idx in zip(("train", "test"), parts):
        _check_groups(name, data.sensitive[idx])
    return tuple(data.take(idx) for idx in parts)


def split_and_standardize(path, schema: DatasetSchema, spec: Optional[SplitSpec] = None,
                          train_fraction: Optional[float] = None, seed: int = 0) -> tuple:
    """
    Split the cleaned rows first and fit the recipe on the training rows only.

    With a SplitSpec returns (train, validation, test, recipe); with
    train_fraction returns (train, test, recipe).
    """
    table = path if isinstance(path, RawTable) else read_raw_table(path, schema.delimiter)
    frame, dropped = _clean_rows(table, schema)
    source = "" if isinstance(path, RawTable) else str(path)
    sensitive = _map_sensitive(frame, schema)

    if spec is not None:
        names = ("train", "validation", "test")
        parts = partition_indices(len(frame), (spec.train_fraction, spec.validation_fraction, spec.test_fraction), spec.seed)
    else:
        names = ("train", "test")
        frac = 0.70 if train_fraction is None else train_fraction
        parts = partition_indices(len(frame), (frac, 1.0 - frac), seed)
    for name, idx in zip(names, parts):
        _check_groups(name, sensitive[idx])

    recipe = fit_recipe(frame.iloc[parts[0]], schema)
    splits = tuple(
        apply_recipe(frame.iloc[idx].reset_index(drop=True), schema, recipe, source=source, dropped_rows=dropped)
        for idx in parts
    )
    return splits + (recipe,)


# ---------- Resampling ----------

def resample_balanced(train: Dataset, mode, seed: int = 0) -> Dataset:
    """Equalize (or, for the one-extra-copy rule, double) the minority sensitive group."""
    mode = ResampleMode(mode)
    rng = np.random.default_rng(seed)
    protected = np.nonzero(train.sensitive == 1)[0]
    unprotected = np.nonzero(train.sensitive == -1)[0]
    if len(protected) == 0 or len(unprotected) == 0:
        raise GroupError("resampling needs both sensitive groups")
    if len(protected) == len(unprotected):
        logger.info("📊 Groups already balanced, resampling is a no-op")
        return train

    if len(protected) < len(unprotected):
        minority, majority = protected, unprotected
    else:
        minority, majority = unprotected, protected

    if mode is ResampleMode.DOWNSAMPLE_MAJORITY:
        kept = np.sort(rng.choice(majority, size=len(minority), replace=False))
        indices = np.sort(np.concatenate([minority, kept]))
    elif mode is ResampleMode.UPSAMPLE_MINORITY_FULL:
        extra = rng.choice(minority, size=len(majority) - len(minority), replace=True)
        indices = np.concatenate([np.arange(train.n), extra])
    else:
        indices = np.concatenate([np.arange(train.n), minority])

    out = train.take(indices)
    na, nb = out.group_sizes()
    logger.info(f"🔄 Resampled ({mode.value}): groups {train.group_sizes()} -> ({na}, {nb})")
    return out
