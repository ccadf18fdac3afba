import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from homophily.errors import (
    DimensionMismatch,
    MaxIterationsExceeded,
    ZeroColWithPositiveTarget,
    ZeroRowWithPositiveTarget,
)
from homophily.ipf import IpfConfig, ipf_step_cols, ipf_step_rows, ipf_transform, margin_residual
from homophily.table import COL, make_table, margins_of, merge_adjacent, odds_ratio


def reference_ipf(seed, rows, cols, iterations):
    """Plain-Python row/column scaling, independent of the package code."""
    v = [list(map(float, r)) for r in seed]
    for _ in range(iterations):
        for i, r in enumerate(v):
            s = sum(r)
            v[i] = [x * rows[i] / s for x in r]
        for j in range(len(cols)):
            s = sum(r[j] for r in v)
            for r in v:
                r[j] *= cols[j] / s
    return np.array(v)


def test_row_step(tables):
    q1 = ipf_step_rows(tables["Q_num1"], margins_of(tables["P_num1"]))
    assert q1.tolist() == [[600, 600], [80, 720]]


def test_col_step(tables):
    target = margins_of(tables["P_num1"])
    q2 = ipf_step_cols(ipf_step_rows(tables["Q_num1"], target), target)
    np.testing.assert_allclose(q2.values, [[529.41, 636.36], [70.59, 763.64]], atol=0.005)


def test_steps_noop_on_matching_margins(tables):
    t = tables["P_num1"]
    assert ipf_step_rows(t, margins_of(t)) == t
    assert ipf_step_cols(t, margins_of(t)) == t


def test_zero_row_and_col():
    target = margins_of(make_table([[1, 1], [1, 1]]))
    with pytest.raises(ZeroRowWithPositiveTarget):
        ipf_step_rows(make_table([[0, 0], [1, 1]]), target)
    with pytest.raises(ZeroColWithPositiveTarget):
        ipf_step_cols(make_table([[0, 1], [0, 1]]), target)


def test_four_iterations(tables):
    r = ipf_transform(tables["Q_num1"], margins_of(tables["P_num1"]), IpfConfig.fixed(4))
    assert r.iterations_used == 4
    assert r.result.rounded().tolist() == [[534, 665], [66, 735]]
    r2 = ipf_transform(tables["Q_num2"], margins_of(tables["P_num2"]), IpfConfig.fixed(4))
    assert r2.result.rounded().tolist() == [[528, 475, 197], [72, 325, 403]]


def test_matches_reference(tables):
    t = margins_of(tables["P_num2"])
    for n in (1, 2, 4, 9):
        got = ipf_transform(tables["Q_num2"], t, IpfConfig.fixed(n)).result.values
        ref = reference_ipf(tables["Q_num2"].tolist(), list(t.row_sums), list(t.col_sums), n)
        np.testing.assert_allclose(got, ref, rtol=1e-13)


def test_fixed_point(tables):
    t = tables["P_num1"]
    r = ipf_transform(t, margins_of(t))
    assert r.iterations_used == 1
    assert r.max_margin_residual == 0


def test_converges(tables):
    target = margins_of(tables["P_num2"])
    r = ipf_transform(tables["Q_num2"], target, IpfConfig.converge(1e-10))
    assert r.max_margin_residual <= 1e-10
    assert margin_residual(r.result.values, target) <= 1e-10


def test_max_iterations():
    # a zero pattern that forbids the target margins never converges
    seed = make_table([[1, 0], [1, 1]])
    target = margins_of(make_table([[1, 5], [5, 1]]))
    with pytest.raises(MaxIterationsExceeded) as exc:
        ipf_transform(seed, target, IpfConfig.converge(1e-12, 50))
    assert exc.value.iterations == 50


def test_start_with_columns(tables):
    # column step first, so a single pass ends on the rows
    a = ipf_transform(tables["Q_num2"], margins_of(tables["P_num2"]), IpfConfig(iterations=1, start="cols")).result
    assert np.allclose(a.row_sums(), [1200, 800])
    b = ipf_transform(tables["Q_num2"], margins_of(tables["P_num2"]), IpfConfig(iterations=1)).result
    assert not np.allclose(a.values, b.values)


def test_shape_mismatch(tables):
    with pytest.raises(DimensionMismatch):
        ipf_transform(tables["Q_num1"], margins_of(tables["P_num2"]))


def test_config_validation():
    with pytest.raises(ValueError):
        IpfConfig.fixed(0)
    with pytest.raises(ValueError):
        IpfConfig(tolerance=0)
    with pytest.raises(ValueError):
        IpfConfig(start="diagonal")


def test_noncommutative_with_merging(tables):
    # merging before and after the transformation gives different tables, even at convergence
    for cfg in (IpfConfig.fixed(4), IpfConfig.converge()):
        direct = ipf_transform(tables["Q_num1"], margins_of(tables["P_num1"]), cfg).result
        after = merge_adjacent(ipf_transform(tables["Q_num2"], margins_of(tables["P_num2"]), cfg).result, COL, 1)
        assert np.max(np.abs(direct.values - after.values)) > 1


two_by_two = arrays(np.float64, (2, 2), elements=st.floats(1, 1000)).map(make_table)


@given(two_by_two, two_by_two, st.integers(1, 6))
def test_odds_ratio_preserved(seed, other, n):
    r = ipf_transform(seed, margins_of(other), IpfConfig.fixed(n)).result
    assert odds_ratio(r) == pytest.approx(odds_ratio(seed), rel=1e-9)


@settings(max_examples=50)
@given(
    st.tuples(st.integers(2, 4), st.integers(2, 4)).flatmap(
        lambda s: st.tuples(arrays(np.float64, s, elements=st.floats(1, 100)), arrays(np.float64, s, elements=st.floats(1, 100)))
    )
)
def test_converged_meets_margins(pair):
    seed, other = (make_table(a) for a in pair)
    target = margins_of(other)
    r = ipf_transform(seed, target)
    assert r.max_margin_residual <= 1e-10
    assert r.result.values.min() >= 0
