import math

import pytest
from hypothesis import given, strategies as st

from coplan.discount import annualize, discount_sum, discounted_investment_cost, epoch_weight
from coplan.scenario import EpochSpec

R = 0.072


def summation(r, first, last):
    return sum(1.0 / (1.0 + r) ** t for t in range(first, last + 1))


def test_zero_rate_weights_each_year_once():
    assert epoch_weight(0.0, EpochSpec(0, 0, 5)) == 5.0


def test_first_epoch_weight_at_7_2_percent():
    w = epoch_weight(R, EpochSpec(0, 0, 5))
    assert w == pytest.approx(summation(R, 0, 4), rel=1e-12)
    # exact rational five-term sum, rounded
    assert w == pytest.approx(4.3719739, abs=1e-7)


def test_second_epoch_is_shifted_first_epoch():
    w0 = epoch_weight(R, EpochSpec(0, 0, 5))
    w1 = epoch_weight(R, EpochSpec(1, 5, 5))
    assert w1 == pytest.approx(summation(R, 5, 9), rel=1e-12)
    assert w1 == pytest.approx(w0 * 1.072 ** -5, rel=1e-12)


def test_investment_cost_unit_years():
    assert discounted_investment_cost(1.0, EpochSpec(0, 0, 5), 19, 0.0) == 20.0


def test_investment_cost_against_summation():
    got = discounted_investment_cost(100.0, EpochSpec(0, 0, 5), 19, R)
    assert got == pytest.approx(100.0 * summation(R, 0, 19), rel=1e-12)


def test_late_investment_is_cheaper():
    early = discounted_investment_cost(100.0, EpochSpec(0, 0, 5), 19, R)
    late = discounted_investment_cost(100.0, EpochSpec(3, 15, 5), 19, R)
    assert late < early


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        discount_sum(-0.01, 0, 4)
    with pytest.raises(ValueError):
        discounted_investment_cost(-1.0, EpochSpec(0, 0, 5), 19, R)
    with pytest.raises(ValueError):
        discounted_investment_cost(1.0, EpochSpec(4, 20, 5), 19, R)


def test_annualize_is_a_product():
    assert annualize(1000.0, 0.1) == pytest.approx(100.0)


@given(r=st.floats(0.001, 0.3), k=st.integers(1, 8), d=st.integers(1, 10))
def test_weight_shift_identity(r, k, d):
    w0 = epoch_weight(r, EpochSpec(0, 0, d))
    wk = epoch_weight(r, EpochSpec(k, k * d, d))
    assert wk == pytest.approx(w0 * (1 + r) ** -(k * d), rel=1e-12)
    assert wk < w0


@given(d=st.integers(1, 10), k=st.integers(0, 8))
def test_weight_constant_at_zero_rate(d, k):
    assert epoch_weight(0.0, EpochSpec(k, k * d, d)) == d


@given(r=st.floats(0.0, 0.3), a=st.integers(0, 19), b=st.integers(0, 19))
def test_investment_cost_monotone_in_start(r, a, b):
    lo, hi = sorted((a, b))
    early = discounted_investment_cost(50.0, EpochSpec(0, lo, 1), 19, r)
    late = discounted_investment_cost(50.0, EpochSpec(0, hi, 1), 19, r)
    assert late <= early * (1 + 1e-15)
    assert math.isfinite(early)
