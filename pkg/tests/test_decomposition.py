import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from homophily.decomposition import CounterfactualSpec, counterfactual, decompose_change, granularity_sensitivity
from homophily.errors import DimensionMismatch, InfeasibleResult, NotSquare
from homophily.ipf import IpfConfig
from homophily.table import COL, make_table

FOUR = IpfConfig.fixed(4)


def test_counterfactual_nm(tables):
    t = counterfactual(CounterfactualSpec(tables["Q_num1"], tables["P_num1"], "nm"))
    np.testing.assert_allclose(t.values, [[520, 680], [80, 720]], atol=1e-9)


def test_counterfactual_ipf(tables):
    t = counterfactual(CounterfactualSpec(tables["Q_num1"], tables["P_num1"], "ipf", FOUR))
    assert t.rounded().tolist() == [[534, 665], [66, 735]]


@pytest.mark.parametrize("method", ["ipf", "nm"])
def test_self_counterfactual(tables, method):
    t = counterfactual(CounterfactualSpec(tables["P_num1"], tables["P_num1"], method))
    np.testing.assert_allclose(t.values, tables["P_num1"].values, atol=1e-9)


def test_unknown_method(tables):
    with pytest.raises(ValueError):
        counterfactual(CounterfactualSpec(tables["P_num1"], tables["P_num1"], "raking"))


def test_nm_decomposition(tables):
    d = decompose_change(tables["P_num1"], tables["Q_num1"], "nm")
    assert d.total == pytest.approx(0.10, abs=1e-12)
    assert d.preference_effect == pytest.approx(0.02, abs=1e-12)


def test_ipf_decomposition_rounded(tables):
    d = decompose_change(tables["P_num1"], tables["Q_num1"], "ipf", ipf_config=FOUR, round_tables=True)
    assert d.preference_effect == pytest.approx(0.0345, abs=1e-12)


def test_granularity_ipf(tables):
    before, after = granularity_sensitivity(
        tables["P_num2"], tables["Q_num2"], "ipf", [(COL, 1)], ipf_config=FOUR, round_tables=True
    )
    assert before.preference_effect == pytest.approx(0.0345, abs=1e-12)
    assert after.preference_effect == pytest.approx(0.028, abs=1e-12)


def test_granularity_nm(tables):
    before, after = granularity_sensitivity(tables["P_num2"], tables["Q_num2"], "nm", [(COL, 1)])
    assert before.preference_effect == pytest.approx(0.02, abs=1e-12)
    assert after.preference_effect == pytest.approx(0.02, abs=1e-12)


@pytest.mark.parametrize("method", ["ipf", "nm"])
def test_granularity_empty_plan(tables, method):
    before, after = granularity_sensitivity(tables["P_num1"], tables["Q_num1"], method, [])
    assert before.as_row() == after.as_row()


def test_late_base(tables):
    e = decompose_change(tables["P_num1"], tables["Q_num1"], "nm")
    late = decompose_change(tables["P_num1"], tables["Q_num1"], "nm", base="late")
    assert late.total == e.total
    assert late.base == "late"
    # with the late base, the interaction flips sign relative to the early base
    assert late.interaction == pytest.approx(-e.interaction, abs=1e-12)


def test_bad_base(tables):
    with pytest.raises(ValueError):
        decompose_change(tables["P_num1"], tables["Q_num1"], "nm", base="middle")


def test_shape_checks(tables):
    with pytest.raises(DimensionMismatch):
        decompose_change(tables["P_num1"], tables["Q_num2"], "nm")
    with pytest.raises(NotSquare):
        decompose_change(tables["P_num2"], tables["Q_num2"], "nm")


def test_custom_statistic(tables):
    d = decompose_change(tables["P_num1"], tables["Q_num1"], "nm", statistic=lambda t: t.values[0, 0] / t.total)
    assert d.statistic == "<lambda>"
    assert d.total == pytest.approx(0.0)


def test_as_row(tables):
    row = decompose_change(tables["P_num1"], tables["Q_num1"], "nm").as_row()
    assert set(row) == {"method", "statistic", "base", "total", "preference_effect", "availability_effect", "interaction"}


square_pairs = st.integers(2, 4).flatmap(
    lambda k: st.tuples(
        arrays(np.float64, (k, k), elements=st.floats(1, 100)), arrays(np.float64, (k, k), elements=st.floats(1, 100))
    )
)


@settings(max_examples=100)
@given(square_pairs, st.sampled_from(["ipf", "nm"]), st.sampled_from(["early", "late"]))
def test_additive(pair, method, base):
    early, late = (make_table(a) for a in pair)
    try:
        d = decompose_change(early, late, method, base=base)
    except InfeasibleResult:
        assume(False)
    assert abs(d.preference_effect + d.availability_effect + d.interaction - d.total) <= 1e-12


@settings(max_examples=100)
@given(square_pairs, st.sampled_from(["ipf", "nm"]))
def test_self_decomposition_zero(pair, method):
    t = make_table(pair[0])
    d = decompose_change(t, t, method)
    for v in (d.total, d.preference_effect, d.availability_effect, d.interaction):
        assert abs(v) <= 1e-12


@settings(max_examples=100)
@given(
    st.integers(3, 4).flatmap(
        lambda k: st.tuples(
            arrays(np.float64, (k, k), elements=st.floats(1, 100)), arrays(np.float64, (k, k), elements=st.floats(1, 100))
        )
    ),
    st.data(),
)
def test_nm_granularity_invariant(pair, data):
    early, late = (make_table(a) for a in pair)
    k = data.draw(st.integers(0, early.shape[1] - 2))
    # merging both axes at the same spot keeps the table square
    plan = [("row", k), (COL, k)]
    try:
        before, after = granularity_sensitivity(early, late, "nm", plan)
    except InfeasibleResult:
        assume(False)
    for f in ("total", "preference_effect", "availability_effect", "interaction"):
        assert getattr(before, f) == pytest.approx(getattr(after, f), abs=1e-9)
