import json

import numpy as np
import pytest
from scipy.special import expit

from fairgap.dataset import Dataset
from fairgap.metrics import MarginSet

# Three protected margins and two unprotected ones:
# DDP_hat = 1/6, linear DDP_tilde = 5/12, balance factor for linear = 2.
FIVE_POINT_MARGINS = [2.0, 1.0, -1.0, 1.0, -0.5]
FIVE_POINT_SENSITIVE = [1, 1, 1, -1, -1]
FIVE_POINT_LABELS = [1, 0, 1, 1, 0]


@pytest.fixture
def five_point():
    return MarginSet(np.array(FIVE_POINT_MARGINS), np.array(FIVE_POINT_SENSITIVE), np.array(FIVE_POINT_LABELS))


def make_biased_dataset(n=400, d=3, seed=0, shift=1.0) -> Dataset:
    """Synthetic data where the unprotected group scores higher on the main feature."""
    rng = np.random.default_rng(seed)
    z = np.where(rng.random(n) < 0.4, 1, -1)
    x = rng.normal(size=(n, d))
    x[:, 0] += shift * (z == -1)
    logits = 1.5 * x[:, 0] + 0.5 * x[:, 1]
    y = (rng.random(n) < expit(logits)).astype(int)
    return Dataset(x, y, z, [f"x{i}" for i in range(d)], source="synthetic")


@pytest.fixture
def biased_dataset():
    return make_biased_dataset()


ADULT_LIKE_SCHEMA = {
    "label_column": "income",
    "positive_label_values": [">50K"],
    "sensitive_column": "sex",
    "protected_value": "Female",
    "numeric_columns": ["age", "hours"],
    "categorical_columns": ["workclass"],
}


def write_adult_like_csv(path, n=200, seed=0, n_missing=3):
    rng = np.random.default_rng(seed)
    lines = ["age, hours, workclass, sex, income"]
    for i in range(n):
        sex = "Female" if rng.random() < 0.4 else "Male"
        age = int(rng.integers(20, 70))
        hours = int(rng.integers(20, 60)) + (5 if sex == "Male" else 0)
        workclass = ["Private", "Self-emp", "Gov"][int(rng.integers(0, 3))]
        if i < n_missing:
            workclass = "?"
        p = expit(0.05 * (age - 40) + 0.08 * (hours - 40) + (0.8 if sex == "Male" else -0.4))
        income = ">50K" if rng.random() < p else "<=50K"
        if i % 17 == 0 and income == ">50K":
            income = ">50K."
        lines.append(f"{age}, {hours}, {workclass}, {sex}, {income}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def adult_like_files(tmp_path):
    """(csv_path, schema_path) for a small Adult-shaped table with a few '?' rows."""
    csv_path = write_adult_like_csv(tmp_path / "adult_like.csv")
    schema_path = tmp_path / "adult_like_schema.json"
    schema_path.write_text(json.dumps(ADULT_LIKE_SCHEMA))
    return csv_path, schema_path


@pytest.fixture
def small_experiment_doc(adult_like_files, tmp_path):
    """A fast experiment config document over the Adult-shaped table."""
    csv_path, schema_path = adult_like_files
    return {
        "name": "adult_like",
        "dataset": csv_path.name,
        "schema": schema_path.name,
        "split": {"train_fraction": 0.6, "validation_fraction": 0.2, "test_fraction": 0.2},
        "surrogates": ["unconstrained", "linear", "general-sigmoid"],
        "balanced_surrogates": ["linear"],
        "rho_grid": [0.5],
        "w_grid": [2.0],
        "seeds": [0, 1],
        "train": {"max_epochs": 40},
        "balanced": {"tau": 3},
        "resample": {"modes": ["downsample_majority", "upsample_minority_full"], "surrogates": ["linear"], "rho": 0.5},
        "boxplot": {"constrained_rho": 2.0},
        "output_dir": str(tmp_path / "out"),
        "verify": {
            "trials": 30,
            "variance_reps": 2000,
            "cov_bias_reps": 2000,
            "cov_bias_ns": [2, 10],
            "cov_risk_ns": [100],
        },
    }


@pytest.fixture
def small_config_path(small_experiment_doc, tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(small_experiment_doc))
    return path
