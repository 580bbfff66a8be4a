import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ADULT_LIKE_SCHEMA, make_biased_dataset
from fairgap.dataset import (
    Dataset,
    DatasetSchema,
    ResampleMode,
    SplitSpec,
    load_csv,
    load_recipe,
    partition_indices,
    read_raw_table,
    resample_balanced,
    save_recipe,
    split,
    split_and_standardize,
    train_test_split,
)
from fairgap.errors import ConfigError, DegenerateColumnError, GroupError, SchemaError, SplitError


@pytest.fixture
def schema():
    return DatasetSchema.from_dict(ADULT_LIKE_SCHEMA)


def test_load_csv_cleans_and_encodes(adult_like_files, schema):
    csv_path, _ = adult_like_files
    data = load_csv(csv_path, schema)
    assert data.dropped_rows == 3
    assert data.n == 197
    assert data.feature_names[:2] == ["age", "hours"]
    assert "workclass=?" not in data.feature_names
    np.testing.assert_allclose(data.features[:, :2].mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(data.features[:, :2].std(axis=0), 1.0, atol=1e-12)
    onehot = data.features[:, 2:]
    np.testing.assert_array_equal(onehot.sum(axis=1), 1.0)
    assert set(np.unique(data.sensitive)) == {-1, 1}


def test_trailing_dot_labels_count_as_positive(tmp_path, schema):
    path = tmp_path / "t.csv"
    path.write_text(
        "age,hours,workclass,sex,income\n"
        "30,40,Private,Female,>50K.\n"
        "50,45,Gov,Male,<=50K\n"
        "41,38,Private,Male,>50K\n"
    )
    data = load_csv(path, schema)
    np.testing.assert_array_equal(data.labels, [1, 0, 1])
    np.testing.assert_array_equal(data.sensitive, [1, -1, -1])


def test_include_sensitive_appends_z_column(tmp_path, schema):
    path = tmp_path / "t.csv"
    path.write_text(
        "age,hours,workclass,sex,income\n"
        "30,40,Private,Female,>50K\n"
        "50,45,Gov,Male,<=50K\n"
        "41,38,Private,Male,>50K\n"
    )
    without = load_csv(path, schema)
    with_z = load_csv(path, DatasetSchema.from_dict({**ADULT_LIKE_SCHEMA, "include_sensitive_as_feature": True}))
    assert with_z.d == without.d + 1
    assert with_z.feature_names[-1] == "sex"
    np.testing.assert_array_equal(with_z.features[:, -1], [1.0, -1.0, -1.0])
    np.testing.assert_array_equal(with_z.features[:, :-1], without.features)


def test_missing_column_is_a_schema_error(tmp_path, schema):
    path = tmp_path / "t.csv"
    path.write_text("age,workclass,sex,income\n30,Private,Female,>50K\n40,Gov,Male,<=50K\n")
    with pytest.raises(SchemaError, match="hours"):
        load_csv(path, schema)


def test_degenerate_column(tmp_path, schema):
    path = tmp_path / "t.csv"
    path.write_text("age,hours,workclass,sex,income\n30,40,Private,Female,>50K\n30,45,Gov,Male,<=50K\n")
    with pytest.raises(DegenerateColumnError, match="age"):
        load_csv(path, schema)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        read_raw_table("/nonexistent/table.csv")


def test_schema_validation():
    with pytest.raises(SchemaError):
        DatasetSchema.from_dict({**ADULT_LIKE_SCHEMA, "numeric_columns": ["age", "income"]})
    with pytest.raises(SchemaError):
        DatasetSchema.from_dict({**ADULT_LIKE_SCHEMA, "categorical_columns": ["workclass", "sex"]})
    with pytest.raises(SchemaError):
        DatasetSchema.from_dict({k: v for k, v in ADULT_LIKE_SCHEMA.items() if k != "label_column"})
    schema = DatasetSchema.from_dict(ADULT_LIKE_SCHEMA)
    assert DatasetSchema.from_dict(schema.to_dict()) == schema


def test_sensitive_range_and_keep_values(tmp_path):
    path = tmp_path / "bank.csv"
    path.write_text(
        "age;balance;job;y\n"
        "22;100;admin;no\n"
        "30;250;technician;yes\n"
        "60;80;admin;no\n"
        "70;300;retired;yes\n"
    )
    bank = DatasetSchema.from_dict({
        "label_column": "y", "positive_label_values": ["yes"], "sensitive_column": "age",
        "sensitive_range": [25, 60], "numeric_columns": ["balance"], "categorical_columns": ["job"],
        "delimiter": ";",
    })
    data = load_csv(path, bank)
    np.testing.assert_array_equal(data.sensitive, [-1, 1, 1, -1])
    np.testing.assert_array_equal(data.labels, [0, 1, 0, 1])

    path = tmp_path / "compas.csv"
    path.write_text(
        "race,priors,sex,two_year_recid\n"
        "African-American,1,Male,1\n"
        "Caucasian,0,Female,0\n"
        "Asian,3,Male,1\n"
        "Caucasian,2,Male,1\n"
    )
    compas = DatasetSchema.from_dict({
        "label_column": "two_year_recid", "positive_label_values": ["1"], "sensitive_column": "race",
        "protected_value": "African-American", "sensitive_keep_values": ["African-American", "Caucasian"],
        "numeric_columns": ["priors"], "categorical_columns": ["sex"],
    })
    data = load_csv(path, compas)
    assert data.n == 3
    np.testing.assert_array_equal(data.sensitive, [1, -1, -1])


def test_recipe_reuse_encodes_unseen_category_as_zeros(tmp_path, adult_like_files, schema):
    csv_path, _ = adult_like_files
    recipe = load_csv(csv_path, schema).recipe
    save_recipe(recipe, tmp_path / "recipe.json")
    assert load_recipe(tmp_path / "recipe.json") == recipe

    other = tmp_path / "other.csv"
    other.write_text("age,hours,workclass,sex,income\n30,40,Never-worked,Female,>50K\n50,45,Gov,Male,<=50K\n")
    data = load_csv(other, schema, recipe=recipe)
    assert data.feature_names == recipe.feature_names
    np.testing.assert_array_equal(data.features[0, 2:], 0.0)


@given(n=st.integers(20, 500), seed=st.integers(0, 2**32 - 1))
def test_partition_is_disjoint_and_complete(n, seed):
    parts = partition_indices(n, (0.70, 0.05, 0.25), seed)
    joined = np.concatenate(parts)
    assert len(joined) == n
    assert len(np.unique(joined)) == n
    assert [len(p) for p in parts][1] >= 1


def test_partition_too_small():
    with pytest.raises(ConfigError):
        partition_indices(10, (0.70, 0.05, 0.25), 0)


def test_split_is_seeded(biased_dataset):
    a = split(biased_dataset, SplitSpec(seed=7))
    b = split(biased_dataset, SplitSpec(seed=7))
    c = split(biased_dataset, SplitSpec(seed=8))
    np.testing.assert_array_equal(a[0].features, b[0].features)
    assert not np.array_equal(a[0].features, c[0].features)
    assert sum(part.n for part in a) == biased_dataset.n


def test_split_names_missing_group():
    n = 40
    z = -np.ones(n, dtype=int)
    z[0] = 1
    data = Dataset(np.random.default_rng(0).normal(size=(n, 2)), np.arange(n) % 2, z, ["a", "b"])
    with pytest.raises(SplitError):
        split(data, SplitSpec(train_fraction=0.5, validation_fraction=0.25, test_fraction=0.25))


def test_split_spec_validation():
    with pytest.raises(ConfigError):
        SplitSpec(0.7, 0.1, 0.1)
    with pytest.raises(ConfigError):
        SplitSpec(0.0, 0.5, 0.5)


def test_dataset_needs_both_groups():
    with pytest.raises(GroupError):
        Dataset(np.zeros((3, 1)), [0, 1, 0], [1, 1, 1], ["a"])
    data = make_biased_dataset(n=50)
    with pytest.raises(ValueError):
        data.features[0, 0] = 1.0


def test_split_and_standardize_fits_on_training_rows(adult_like_files, schema):
    csv_path, _ = adult_like_files
    train, test, recipe = split_and_standardize(csv_path, schema, train_fraction=0.7, seed=3)
    assert train.n + test.n == 197
    np.testing.assert_allclose(train.features[:, :2].mean(axis=0), 0.0, atol=1e-12)
    assert train.recipe is recipe and test.recipe is recipe

    train3, val3, test3, _ = split_and_standardize(
        csv_path, schema, spec=SplitSpec(0.6, 0.2, 0.2, seed=3))
    assert train3.n + val3.n + test3.n == 197


def test_train_test_split_sizes(biased_dataset):
    train, test = train_test_split(biased_dataset, 0.7, seed=1)
    assert (train.n, test.n) == (280, 120)


def test_train_test_split_matches_leakage_free_rows(adult_like_files, schema):
    csv_path, _ = adult_like_files
    encoded = load_csv(csv_path, schema)
    train, test = train_test_split(encoded, 0.7, seed=3)
    train_ls, test_ls, _ = split_and_standardize(csv_path, schema, train_fraction=0.7, seed=3)
    for ours, theirs in ((train, train_ls), (test, test_ls)):
        np.testing.assert_array_equal(ours.labels, theirs.labels)
        np.testing.assert_array_equal(ours.sensitive, theirs.sensitive)
        # one-hot blocks do not depend on the standardization statistics
        np.testing.assert_array_equal(ours.features[:, 2:], theirs.features[:, 2:])


@pytest.mark.parametrize("mode", list(ResampleMode), ids=lambda m: m.value)
def test_resample_modes(mode, biased_dataset):
    na, nb = biased_dataset.group_sizes()
    minority = min(na, nb)
    out = resample_balanced(biased_dataset, mode, seed=0)
    new_na, new_nb = out.group_sizes()
    if mode is ResampleMode.DOWNSAMPLE_MAJORITY:
        assert new_na == new_nb == minority
    elif mode is ResampleMode.UPSAMPLE_MINORITY_FULL:
        assert new_na == new_nb == max(na, nb)
    else:
        doubled, other = (new_na, new_nb) if na < nb else (new_nb, new_na)
        assert doubled == 2 * minority
        assert other == max(na, nb)


def test_resample_balanced_input_is_unchanged():
    z = np.array([1, -1] * 10)
    data = Dataset(np.arange(40.0).reshape(20, 2), np.arange(20) % 2, z, ["a", "b"])
    assert resample_balanced(data, "downsample_majority") is data
