"""Prime-field rank laws and the randomized linear learner."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvrisk.linfield import (
    FieldSpec,
    FqMatrix,
    LinearHypothesis,
    batched_nullspace_sample,
    batched_rank,
    batched_rref,
    expected_loss_exact,
    fold_noise_exact,
    fold_noise_envelope_check,
    gaussian_coefficient,
    linear_mse_bound,
    linear_mse_exact_d1,
    linear_mse_mc,
    linear_mse_mc_detail,
    linear_rule,
    rank_asymptotics_check,
    rank_distribution,
    rank_prob,
    solve_uniform,
    uniform_linear_dist,
)
from cvrisk.types import Inconsistent, InvalidFoldSize, LabeledPoint, OutOfRange


class TestGaussianCoefficient:
    def test_empty_product(self):
        assert gaussian_coefficient(7, 0, 3) == 1

    def test_lines_of_f2_squared(self):
        # 1-dim subspaces of F_2^2 by enumeration: {(0,1)}, {(1,0)}, {(1,1)} spans
        assert gaussian_coefficient(2, 1, 2) == 3

    def test_4_2_2(self):
        assert gaussian_coefficient(4, 2, 2) == 35  # (15*7)/(3*1)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            gaussian_coefficient(3, 4, 2)


class TestRankProb:
    def test_rank_zero_single_matrix(self):
        assert rank_prob(3, 4, 0, 5) == Fraction(1, 5 ** 12)

    def test_2x2_q2(self):
        # 6 invertible of the 16 binary 2x2 matrices
        assert rank_prob(2, 2, 2, 2) == Fraction(3, 8)

    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_formulas_agree_and_sum_to_one(self, q):
        for n1 in range(1, 7):
            for n2 in range(1, 7):
                total = Fraction(0)
                for r in range(min(n1, n2) + 1):
                    a = rank_prob(n1, n2, r, q, "sum")
                    assert a == rank_prob(n1, n2, r, q, "product")
                    total += a
                assert total == 1

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            rank_prob(2, 2, 3, 2)

    def test_distribution_object(self):
        rd = rank_distribution(4, 4, 3)
        assert sum(rd.probs) == 1

    def test_matches_exhaustive_2x2_q2(self):
        # enumerate all 16 matrices
        counts = [0, 0, 0]
        for bits in range(16):
            M = [[(bits >> j) & 1 for j in range(2)], [(bits >> (2 + j)) & 1 for j in range(2)]]
            r = int(batched_rank(np.array([M]), 2)[0])
            counts[r] += 1
        for r in range(3):
            assert rank_prob(2, 2, r, 2) == Fraction(counts[r], 16)


class TestRankAsymptotics:
    def test_full_rank_5_3_q3(self):
        chk = rank_asymptotics_check(5, 3, 0, 3)
        assert chk.holds and chk.rhs == pytest.approx(4 * 3.0 ** -3)

    def test_deficiency_one_square(self):
        assert rank_asymptotics_check(4, 4, 1, 2).holds
        assert rank_asymptotics_check(4, 4, 1, 7).holds

    def test_j0_trivial_envelope(self):
        chk = rank_asymptotics_check(2, 6, 0, 2)
        assert chk.holds


class TestSolveUniform:
    def test_unique_solution(self):
        coset, h = solve_uniform(FqMatrix(rows=((1,),), q=2), [1], seed=0)
        assert coset.particular == (1,)
        assert coset.size == 1
        assert h.coeffs == (1,)

    def test_rank_deficient_coset(self):
        coset, _h = solve_uniform(FqMatrix(rows=((0,),), q=2), [0], seed=0)
        assert sorted(coset.elements()) == [(0,), (1,)]

    def test_inconsistent(self):
        with pytest.raises(Inconsistent):
            solve_uniform(FqMatrix(rows=((0,),), q=2), [1], seed=0)

    def test_draws_cover_coset_uniformly(self):
        from cvrisk.mc import trial_rng

        coset, _ = solve_uniform(FqMatrix(rows=((1, 2, 0),), q=3), [1], seed=0)
        counts = {e: 0 for e in coset.elements()}
        draws = 4000
        for t in range(draws):
            counts[coset.sample(trial_rng(99, t))] += 1
        expect = draws / len(counts)
        stat = sum((c - expect) ** 2 / expect for c in counts.values())
        from cvrisk.verify import _chi2_sf

        assert _chi2_sf(stat, len(counts) - 1) > 1e-3

    def test_every_element_solves(self):
        X = FqMatrix(rows=((1, 2, 0), (2, 4, 0)), q=5)
        coset, _ = solve_uniform(X, [3, 1], seed=1)
        for b in coset.elements():
            for row, rhs in zip(X.rows, (3, 1)):
                assert sum(r * v for r, v in zip(row, b)) % 5 == rhs


class TestLinearRule:
    def test_full_rank_returns_truth(self):
        rule = linear_rule(1, 2)
        mix = rule.train((LabeledPoint((1,), 0),))
        assert len(mix.atoms) == 1
        assert mix.atoms[0][0].name.startswith("lin(0,)")

    def test_mixture_probability_is_rank_law(self):
        rule = linear_rule(3, 3)
        pts = (LabeledPoint((1, 0, 0), 0), LabeledPoint((2, 0, 0), 0))  # rank 1
        mix = rule.train(pts)
        probs = dict((h.name.startswith("linwrong"), p) for h, p in mix.atoms)
        assert probs[False] == Fraction(1, 9)  # q^(r-d) = 3^(1-3)
        assert probs[True] == Fraction(8, 9)

    def test_wrong_surrogate_risk(self):
        rule = linear_rule(2, 5)
        mix = rule.train((LabeledPoint((0, 0), 0),))
        wrong = [h for h, _ in mix.atoms if h.predict is None][0]
        assert wrong.risk(uniform_linear_dist((0, 0), 5)) == Fraction(4, 5)

    def test_non_realizable_sample_rejected(self):
        rule = linear_rule(2, 3)
        with pytest.raises(Inconsistent):
            rule.train((LabeledPoint((1, 1), 1),))

    def test_mean_risk_via_enumeration(self):
        # d=1, q=2, one training point: exhaustive over feature values x coset
        from cvrisk.exact import exact_functional

        rule = linear_rule(1, 2)
        dist = uniform_linear_dist((0,), 2)
        assert exact_functional(rule, dist, 1, 1, "mean") == Fraction(1, 8)

    def test_sampled_mode_consistent_and_symmetric(self):
        rule = linear_rule(2, 3, mode="sample", seed=4)
        pts = (LabeledPoint((1, 2), 0), LabeledPoint((2, 1), 0))
        a = rule.train(pts).atoms[0][0]
        b = rule.train(tuple(reversed(pts))).atoms[0][0]
        assert a == b


class TestLossLaws:
    def test_expected_loss_1_1_2(self):
        lbar, s0, var = expected_loss_exact(1, 1, 2)
        assert (lbar, s0) == (Fraction(1, 8), Fraction(1, 4))
        assert var == Fraction(1, 4) * Fraction(1, 4) * (1 - Fraction(1, 4))

    def test_no_training_data(self):
        lbar, _s0, _ = expected_loss_exact(0, 3, 2)
        assert lbar == (1 - Fraction(1, 2)) * (1 - Fraction(1, 8))

    def test_full_rank_term_contributes_zero(self):
        # at n' >= d the r=d term has weight (1 - q^0) = 0: S0 < 1 strictly
        _, s0, _ = expected_loss_exact(5, 2, 3)
        assert 0 < s0 < Fraction(1, 2)

    def test_fold_noise_1_1_2(self):
        assert fold_noise_exact(1, 1, 2, 1) == Fraction(3, 32)

    def test_fold_noise_full_rank_term_contributes_zero(self):
        # the r=d term has L_d = 0, so the restricted sum is the whole value
        n_train, d, q, m = 3, 2, 3, 2
        restricted = Fraction(0)
        one = 1 - Fraction(1, q)
        for r in range(d):  # r < d only
            lr = (1 - Fraction(1, q ** (d - r))) * one
            restricted += rank_prob(n_train, d, r, q) * lr * (1 - lr)
        assert fold_noise_exact(n_train, d, q, m) == restricted / m

    def test_envelope_holds_and_value_decays(self):
        vals = [fold_noise_exact(4, 3, q, 2) for q in (2, 3, 5, 7, 11)]
        assert all(vals[i] > vals[i + 1] for i in range(len(vals) - 1))
        assert all(fold_noise_envelope_check(4, 3, q, 2).holds for q in (2, 3, 5, 7, 11))


class TestMseBound:
    def test_case1(self):
        assert linear_mse_bound(5, 1, 10, 3) == (1, Fraction(1, 243))

    def test_case2(self):
        assert linear_mse_bound(10, 5, 8, 11) == (2, Fraction(1))

    def test_case3(self):
        assert linear_mse_bound(12, 2, 10, 5) == (3, Fraction(1, 5))

    def test_fold_size_must_divide(self):
        with pytest.raises(InvalidFoldSize):
            linear_mse_bound(10, 4, 8, 3)


class TestMonteCarlo:
    def test_deterministic(self):
        a = linear_mse_mc(4, 2, 2, 3, 2_000, seed=67)
        b = linear_mse_mc(4, 2, 2, 3, 2_000, seed=67)
        assert a == b

    def test_d1_oracle_agreement(self):
        want = linear_mse_exact_d1(4, 2, 3)
        est = linear_mse_mc(4, 2, 1, 3, 30_000, seed=42)
        assert est.within(want, 3)

    def test_d1_oracle_agreement_loo(self):
        want = linear_mse_exact_d1(3, 3, 2)
        est = linear_mse_mc(3, 3, 1, 2, 30_000, seed=43)
        assert est.within(want, 3)

    def test_mean_checks_against_closed_forms(self):
        det = linear_mse_mc_detail(6, 3, 4, 5, 30_000, seed=3)
        assert det["mean_cv"].within(expected_loss_exact(4, 4, 5)[0], 3)
        assert det["mean_risk"].within(expected_loss_exact(6, 4, 5)[0], 3)


class TestBatchedElimination:
    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(0, 10_000),
        st.sampled_from([2, 3, 5]),
        st.integers(1, 5),
        st.integers(1, 5),
    )
    def test_rank_matches_scalar(self, seed, q, n1, n2):
        rng = np.random.default_rng(seed)
        Xs = rng.integers(0, q, size=(32, n1, n2))
        got = batched_rank(Xs, q)
        for i in range(32):
            rows = tuple(tuple(int(v) for v in row) for row in Xs[i])
            coset, _ = solve_uniform(FqMatrix(rows=rows, q=q), [0] * n1, seed=0)
            assert n2 - len(coset.basis) == int(got[i])

    def test_nullspace_samples_solve(self):
        rng = np.random.default_rng(5)
        Xs = rng.integers(0, 5, size=(100, 3, 4))
        R, rank, piv = batched_rref(Xs, 5)
        v = batched_nullspace_sample(R, rank, piv, 5, rng.integers(0, 5, size=(100, 4)))
        assert (np.einsum("tnd,td->tn", Xs, v) % 5 == 0).all()


def test_field_spec_rejects_composite():
    with pytest.raises(ValueError):
        FieldSpec(6)


def test_risk_polarization_exhaustive():
    truth = LinearHypothesis(coeffs=(0, 0, 0), q=2)
    dist = uniform_linear_dist(truth.coeffs, 2)
    for bits in range(8):
        h = LinearHypothesis(coeffs=((bits >> 2) & 1, (bits >> 1) & 1, bits & 1), q=2)
        risk = h.as_hypothesis().support_sum_risk(dist)
        assert risk == h.risk_vs(truth)
        assert risk in (Fraction(0), Fraction(1, 2))
