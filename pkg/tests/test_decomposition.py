"""MSE decomposition, stability profile, bound suite, anticorrelated fixture."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cvrisk.decomposition import (
    anticorr_fixture,
    bound_suite,
    decompose,
    stability_estimates,
)
from cvrisk.majority import majority_rule
from cvrisk.types import FiniteDistribution, InputMismatch, constant_rule
from cvrisk.verify import random_instance

HALF = FiniteDistribution.bernoulli_labels(Fraction(1, 2))


class TestDecompose:
    def test_majority_n4_k2(self):
        rep = decompose(majority_rule(4), HALF, 4, 2)
        assert rep.sls == 0
        assert rep.inter_fold_cov == Fraction(1, 16)
        assert rep.per_fold_noise == Fraction(1, 4)
        assert rep.corr_hold == 0
        assert rep.corr_risk == 0
        assert rep.mse == Fraction(3, 32)
        assert rep.residual == 0

    def test_anticorr_n2(self):
        rule, dist = anticorr_fixture(2)
        rep = decompose(rule, dist, 2, 2)
        assert rep.mse == 0
        assert rep.sls == Fraction(1, 8)

    def test_constant_rule_folds_independent(self):
        rep = decompose(constant_rule(0), HALF, 4, 2)
        assert rep.sls == 0
        assert rep.inter_fold_cov == 0
        assert rep.mse == Fraction(1, 16)
        assert rep.residual == 0

    def test_mc_mode_reports_estimates(self):
        rep = decompose(majority_rule(4), HALF, 4, 2, mode="mc", trials=4_000, seed=5)
        assert rep.mode == "mc"
        assert abs(rep.mse.value - 3 / 32) < 4 * rep.mse.std_error + 1e-12
        rep2 = decompose(majority_rule(4), HALF, 4, 2, mode="mc", trials=4_000, seed=5)
        assert rep == rep2


class TestStability:
    def test_constant_rule_all_zero(self):
        prof = stability_estimates(constant_rule(0), HALF, 4, 2)
        assert prof.sls_beta == 0
        assert prof.loss_stability == 0
        assert prof.hypothesis_stability == 0
        assert prof.risk_var_n == 0 and prof.risk_var_train == 0

    def test_anticorr_sls(self):
        rule, dist = anticorr_fixture(2)
        prof = stability_estimates(rule, dist, 2, 1)
        assert prof.sls_beta == Fraction(1, 8)
        # interval hypothesis has no pointwise predictor
        assert prof.hypothesis_stability is None

    def test_majority_n2_sls_zero(self):
        # every output hypothesis has risk exactly 1/2 under fair labels
        prof = stability_estimates(majority_rule(2), HALF, 2, 1)
        assert prof.sls_beta == 0

    def test_jensen_relation(self):
        # beta_2^2 <= E[(L_{n-m} - L_n)^2] <= var_t + var_n + gap^2 surrogate
        prof = stability_estimates(majority_rule(6), HALF, 6, 2)
        b2 = prof.loss_stability
        spread = (
            prof.risk_var_train
            + prof.risk_var_n
            + (prof.mean_risk_train - prof.mean_risk_n) ** 2
        )
        assert 0 <= b2 <= 1
        assert b2 * b2 <= spread + Fraction(1, 1)  # sanity envelope


class TestBoundSuite:
    def _pair(self, rule, dist, n, k):
        rep = decompose(rule, dist, n, k)
        prof = stability_estimates(rule, dist, n, n // k)
        return rep, prof

    def test_majority_n4_k2_noise_bound_tight(self):
        rep, prof = self._pair(majority_rule(4), HALF, 4, 2)
        checks = {c.name: c for c in bound_suite(rep, prof)}
        c = checks["noise-bhatia-davis"]
        # majority's conditional risk is identically 1/2: both sides equal 1/4
        assert c.holds and c.slack == 0.0
        assert rep.per_fold_noise == Fraction(1, 4)
        cov = checks["fold-cov-range"]
        assert cov.holds  # lower bound trivial: Cov = 1/16 > 0

    def test_anticorr_mse_lower_bound(self):
        rule, dist = anticorr_fixture(2)
        rep, prof = self._pair(rule, dist, 2, 2)
        checks = {c.name: c for c in bound_suite(rep, prof)}
        c = checks["mse-lower"]
        assert c.holds
        assert c.lhs <= 0.0 == rep.mse  # the lower bound is <= 0 = mse

    def test_all_five_hold_on_named_instances(self):
        for rule, dist, n, k in (
            (majority_rule(6), HALF, 6, 3),
            (constant_rule(0), HALF, 4, 4),
            (*anticorr_fixture(4), 4, 2),
        ):
            rep, prof = self._pair(rule, dist, n, k)
            checks = bound_suite(rep, prof)
            assert len(checks) == 5
            assert all(c.holds for c in checks), [c for c in checks if not c.holds]

    def test_input_mismatch(self):
        rep = decompose(majority_rule(4), HALF, 4, 2)
        prof = stability_estimates(majority_rule(4), HALF, 4, 1)
        with pytest.raises(InputMismatch):
            bound_suite(rep, prof)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_residual_zero_and_bounds_hold(seed):
    """The decomposition identity and all five bounds, property-tested."""
    rule, dist, n, k = random_instance(seed)
    rep = decompose(rule, dist, n, k)
    assert rep.residual == 0
    prof = stability_estimates(rule, dist, n, n // k)
    assert all(c.holds for c in bound_suite(rep, prof))


def test_anticorr_even_n_required():
    with pytest.raises(ValueError):
        anticorr_fixture(3)


def test_anticorr_n4_values():
    rule, dist = anticorr_fixture(4)
    for k in (2, 4):
        rep = decompose(rule, dist, 4, k)
        assert rep.mse == 0
        assert rep.sls == Fraction(1, 16)
        assert rep.residual == 0
