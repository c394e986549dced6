import numpy as np
import pytest
from hypothesis import given, strategies as st
from statsmodels.stats.proportion import proportion_confint

from bornchain.stats import (
    chi_square_gof,
    chi_square_pvalue,
    mean_z_test,
    proportion_interval,
    ratio_standard_error,
)


def test_wilson_examples():
    lo, hi = proportion_interval(0, 100, 0.95)
    assert lo == 0 and hi < 0.05
    # z^2 / (n + z^2) with z = 1.959964
    assert hi == pytest.approx(0.0369935, abs=1e-7)
    lo, hi = proportion_interval(50, 100, 0.95)
    assert 0.5 - lo == pytest.approx(hi - 0.5)
    assert proportion_interval(100, 100, 0.95)[1] == 1


@pytest.mark.parametrize("k,n,level", [(3, 10, 0.95), (300, 1000, 0.999), (59410, 200000, 0.999), (1, 7, 0.5)])
def test_wilson_matches_statsmodels(k, n, level):
    ref = proportion_confint(k, n, alpha=1 - level, method="wilson")
    np.testing.assert_allclose(proportion_interval(k, n, level), ref, rtol=1e-12)


@given(st.integers(1, 10**6).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))), st.floats(0.5, 0.9999))
def test_wilson_contains_estimate(kn, level):
    k, n = kn
    lo, hi = proportion_interval(k, n, level)
    assert 0 <= lo <= k / n <= hi <= 1


def test_wilson_argument_errors():
    with pytest.raises(ValueError):
        proportion_interval(5, 4)
    with pytest.raises(ValueError):
        proportion_interval(1, 4, 1.0)


# upper-tail critical values from standard chi-square tables
@pytest.mark.parametrize(
    "stat,dof,p",
    [(3.841, 1, 0.05), (6.635, 1, 0.01), (10.828, 1, 0.001), (5.991, 2, 0.05), (18.307, 10, 0.05), (2.706, 1, 0.10)],
)
def test_pvalue_table(stat, dof, p):
    assert chi_square_pvalue(stat, dof) == pytest.approx(p, abs=1e-3 * p if p < 0.01 else 1e-3)


def test_gof_exact_match():
    g = chi_square_gof([300, 700], [0.3, 0.7], 1000)
    assert g.statistic == 0 and g.p_value == 1 and g.dof == 1


def test_gof_known_statistic():
    g = chi_square_gof([40, 60], [0.5, 0.5], 100)
    assert g.statistic == pytest.approx(4.0)
    assert g.p_value == pytest.approx(0.0455003, abs=1e-6)


def test_gof_input_errors():
    with pytest.raises(ValueError):
        chi_square_gof([1, 2], [0.0, 1.0])
    with pytest.raises(ValueError):
        chi_square_gof([1, 2], [0.4, 0.4])
    with pytest.warns(UserWarning):
        chi_square_gof([1, 2], [0.5, 0.5], 3)


@given(st.lists(st.integers(5, 500), min_size=2, max_size=6), st.randoms())
def test_gof_permutation_invariant(obs, rnd):
    exp = np.ones(len(obs)) / len(obs)
    perm = list(range(len(obs)))
    rnd.shuffle(perm)
    a = chi_square_gof(obs, exp)
    b = chi_square_gof([obs[i] for i in perm], exp[perm])
    assert a.statistic == pytest.approx(b.statistic)
    assert 0 <= a.p_value <= 1 and a.statistic >= 0


@given(st.integers(1, 50))
def test_zero_statistic_has_unit_pvalue(dof):
    assert chi_square_pvalue(0.0, dof) == 1.0


@given(st.integers(1, 20), st.floats(0, 100), st.floats(0, 100))
def test_pvalue_monotone(dof, x, y):
    lo, hi = sorted((x, y))
    assert chi_square_pvalue(lo, dof) >= chi_square_pvalue(hi, dof)


def test_z_examples():
    assert mean_z_test(42, 10, 100, 42) == 0
    assert mean_z_test(43, 10, 100, 42) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mean_z_test(1, 0, 10, 1)
    with pytest.raises(ValueError):
        mean_z_test(1, 1, 1, 1)


def test_ratio_standard_error_on_constant_ratio():
    den = np.array([2, 4, 6, 8])
    assert ratio_standard_error(den / 2, den) == 0
    assert ratio_standard_error(np.array([1.0]), np.array([2.0])) == 0
