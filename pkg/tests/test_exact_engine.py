"""Exact exhaustive expectation engine."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cvrisk.decomposition import anticorr_fixture
from cvrisk.exact import FUNCTIONALS, decomposition_pass, exact_functional
from cvrisk.majority import majority_rule
from cvrisk.types import BudgetExceeded, FiniteDistribution, constant_rule


def test_constant_rule_mse_is_binomial_variance():
    # constant algorithm: MSE = p(1-p)/n
    dist = FiniteDistribution.bernoulli_labels(Fraction(1, 2))
    assert exact_functional(constant_rule(0), dist, 4, 2, "mse") == Fraction(1, 16)


@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(2, 3)])
def test_constant_rule_mse_other_masses(p):
    dist = FiniteDistribution.bernoulli_labels(p)
    assert exact_functional(constant_rule(0), dist, 3, 3, "mse") == p * (1 - p) / 3


def test_majority_loo_fold_cov():
    dist = FiniteDistribution.bernoulli_labels(Fraction(1, 2))
    got = exact_functional(majority_rule(4), dist, 4, 4, "fold_cov")
    assert got == Fraction(1, 8)


def test_anticorr_mse_zero():
    rule, dist = anticorr_fixture(2)
    assert exact_functional(rule, dist, 2, 2, "mse") == 0


def test_budget_exceeded():
    dist = FiniteDistribution.bernoulli_labels(Fraction(1, 2))
    with pytest.raises(BudgetExceeded):
        exact_functional(majority_rule(8), dist, 8, 2, "mse", budget=100)


def test_support_order_independence():
    dist = FiniteDistribution.bernoulli_labels(Fraction(1, 3))
    rev = FiniteDistribution(
        support=tuple(reversed(dist.support)), masses=tuple(reversed(dist.masses))
    )
    rule = majority_rule(4)
    for f in FUNCTIONALS:
        assert exact_functional(rule, dist, 4, 2, f) == exact_functional(rule, rev, 4, 2, f)


def test_mean_risk_and_variance_constants():
    dist = FiniteDistribution.bernoulli_labels(Fraction(1, 2))
    # majority's output always has population risk exactly 1/2
    assert exact_functional(majority_rule(4), dist, 4, 2, "mean") == Fraction(1, 2)
    assert exact_functional(majority_rule(4), dist, 4, 2, "loss_var") == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_fold_pairs_exchangeable(seed):
    """Cov(Lhat_1, Lhat_2) equals Cov(Lhat_1, Lhat_3) for symmetric rules."""
    import random

    from cvrisk.verify import random_label_rule

    rng = random.Random(seed)
    rule = random_label_rule(rng, 6)
    dist = FiniteDistribution.bernoulli_labels(Fraction(rng.randrange(1, 4), 4))
    t = decomposition_pass(rule, dist, 6, 3)
    assert t["fold_cov"] == t["fold_cov_13"]
