"""Seeded Monte Carlo engine: determinism and statistical agreement."""

from fractions import Fraction

import pytest

from cvrisk.exact import FUNCTIONALS, exact_functional
from cvrisk.majority import majority_rule
from cvrisk.mc import mc_functional
from cvrisk.types import FiniteDistribution, constant_rule
from cvrisk.verify import random_instance

DIST = FiniteDistribution.bernoulli_labels(Fraction(1, 2))


def test_bit_identical_reruns():
    a = mc_functional(majority_rule(4), DIST, 4, 2, "mse", 300, seed=123)
    b = mc_functional(majority_rule(4), DIST, 4, 2, "mse", 300, seed=123)
    assert a == b


def test_thread_count_does_not_change_output():
    a = mc_functional(majority_rule(6), DIST, 6, 3, "fold_cov", 400, seed=9, threads=1)
    b = mc_functional(majority_rule(6), DIST, 6, 3, "fold_cov", 400, seed=9, threads=5)
    assert a == b


def test_zero_variance_constant_rule():
    est = mc_functional(constant_rule(0), DIST, 4, 2, "mean", 100, seed=3)
    assert est.std_error == 0.0
    assert est.value == 0.5


def test_majority_fold_cov_against_exact():
    exact = exact_functional(majority_rule(8), DIST, 8, 2, "fold_cov")
    est = mc_functional(majority_rule(8), DIST, 8, 2, "fold_cov", 100_000, seed=2024)
    assert est.std_error > 0
    assert est.within(exact, 3)


@pytest.mark.parametrize("functional", FUNCTIONALS)
def test_all_functionals_within_4_sigma(functional):
    rule, dist, n, k = majority_rule(6), DIST, 6, 3
    want = exact_functional(rule, dist, n, k, functional)
    est = mc_functional(rule, dist, n, k, functional, 5_000, seed=77)
    if est.std_error == 0:
        assert est.value == float(want)
    else:
        assert est.within(want, 4)


def test_random_rule_within_4_sigma():
    rule, dist, n, k = random_instance(31)
    for functional in FUNCTIONALS:
        want = exact_functional(rule, dist, n, k, functional)
        est = mc_functional(rule, dist, n, k, functional, 5_000, seed=13)
        assert est.std_error == 0 and est.value == float(want) or est.within(want, 4)


def test_trials_validation():
    with pytest.raises(ValueError):
        mc_functional(constant_rule(0), DIST, 4, 2, "mean", 1, seed=0)
