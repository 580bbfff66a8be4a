import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairgap.errors import ConfigError, DomainError, NotDifferentiableError
from fairgap.surrogates import (
    GroupSplitSurrogate,
    Surrogate,
    SurrogateKind,
    all_surrogates,
    evaluate,
    evaluate_derivative,
    gap_curve,
    general_sigmoid,
    parse_surrogate,
    q_gap,
    split_parts,
)

finite = st.floats(min_value=-30, max_value=30, allow_nan=False, allow_infinity=False)
DIFFERENTIABLE = [s for s in all_surrogates() if s.differentiable]


@pytest.mark.parametrize("s", all_surrogates(), ids=lambda s: s.name)
def test_name_parses_back(s):
    assert parse_surrogate(s.name) == s


def test_aliases_and_whitespace():
    assert parse_surrogate(" CP ").kind is SurrogateKind.LINEAR
    assert parse_surrogate("logsigmoid").kind is SurrogateKind.LOG_SIGMOID
    assert parse_surrogate("general_sigmoid:w=2,odd") == general_sigmoid(2.0, odd=True)


@pytest.mark.parametrize("name", ["general-sigmoid", "general-sigmoid:w=0", "softmax", "hinge:w=2", "linear:odd"])
def test_bad_names_raise(name):
    with pytest.raises(ConfigError):
        parse_surrogate(name)


@pytest.mark.parametrize("s", all_surrogates(), ids=lambda s: s.name)
@given(a=finite, b=finite)
def test_monotone_nondecreasing(s, a, b):
    lo, hi = min(a, b), max(a, b)
    assert evaluate(s, lo) <= evaluate(s, hi)


@pytest.mark.parametrize("s", DIFFERENTIABLE, ids=lambda s: s.name)
@given(x=st.floats(min_value=-8, max_value=8))
@settings(max_examples=60)
def test_derivative_matches_finite_difference(s, x):
    if s.kind is SurrogateKind.HINGE and abs(x + 1.0) < 1e-3:
        return
    h = 1e-6
    numeric = (evaluate(s, x + h) - evaluate(s, x - h)) / (2 * h)
    assert evaluate_derivative(s, x) == pytest.approx(numeric, rel=1e-5, abs=1e-6)


def test_indicator_has_no_derivative():
    with pytest.raises(NotDifferentiableError):
        evaluate_derivative(Surrogate(SurrogateKind.INDICATOR), 0.5)


def test_indicator_tie_goes_negative():
    assert evaluate(Surrogate(SurrogateKind.INDICATOR), 0.0) == 0.0


def test_non_finite_input_is_rejected():
    with pytest.raises(DomainError):
        evaluate(Surrogate(SurrogateKind.LINEAR), [1.0, math.nan])


def test_known_values():
    assert evaluate(Surrogate(SurrogateKind.HINGE), -2.0) == 0.0
    assert evaluate(Surrogate(SurrogateKind.HINGE), 0.5) == 1.5
    assert evaluate(Surrogate(SurrogateKind.SIGMOID), 0.0) == 0.5
    assert evaluate(Surrogate(SurrogateKind.LOG_SIGMOID), 0.0) == pytest.approx(math.log(2.0))
    assert evaluate(general_sigmoid(4.0, odd=True), 0.0) == 0.0
    # log-sigmoid stays finite far from the origin
    assert evaluate(Surrogate(SurrogateKind.LOG_SIGMOID), 800.0) == pytest.approx(800.0)


def test_large_w_approaches_indicator():
    xs = np.array([-1.0, -0.1, 0.1, 1.0])
    np.testing.assert_allclose(evaluate(general_sigmoid(500.0), xs), [0, 0, 1, 1], atol=1e-12)


def test_bounded_flags():
    bounded = {s.kind for s in all_surrogates() if s.bounded}
    assert bounded == {SurrogateKind.INDICATOR, SurrogateKind.SIGMOID, SurrogateKind.GENERAL_SIGMOID}


def test_w_only_for_general_sigmoid():
    with pytest.raises(ConfigError):
        Surrogate(SurrogateKind.LINEAR, w=2.0)
    with pytest.raises(ConfigError):
        general_sigmoid(-1.0)


def test_gap_curve():
    xs = np.array([-1.0, 1.0])
    np.testing.assert_array_equal(gap_curve(Surrogate(SurrogateKind.INDICATOR), xs), [0.0, 0.0])
    np.testing.assert_array_equal(gap_curve(Surrogate(SurrogateKind.LINEAR), xs), [1.0, 0.0])


def test_q_gap_values():
    assert q_gap(0.5, 2.0) == pytest.approx(0.037883, abs=1e-6)
    assert q_gap(0.5, 5.0) == pytest.approx(0.401716, abs=1e-6)
    with pytest.raises(DomainError):
        q_gap(0.0, 1.0)


def test_group_split_parts():
    phi = Surrogate(SurrogateKind.HINGE)
    assert split_parts(phi) == (phi, 1.0)
    assert split_parts(GroupSplitSurrogate(phi, 2.5)) == (phi, 2.5)
    with pytest.raises(ConfigError):
        GroupSplitSurrogate(phi, -0.1)
