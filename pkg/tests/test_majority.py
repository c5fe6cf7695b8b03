"""Majority algorithm: exact covariance, conditional form, approximations,
minimizer, and MSE closed form."""

import math
from fractions import Fraction

import pytest

from cvrisk.majority import (
    CentralMass,
    central_mass,
    comb0,
    cov_approx,
    cov_bruteforce,
    cov_conditional,
    cov_exact,
    fold_size_divisors,
    majority_rule,
    minimize_cov,
    mse_majority,
)
from cvrisk.types import FormDomain, InvalidFoldSize, LabeledPoint


def labels(*ys):
    return tuple(LabeledPoint("*", y) for y in ys)


class TestRule:
    def test_minority_of_ones(self):
        mix = majority_rule(3).train(labels(0, 0, 1))
        assert mix.atoms[0][0].name == "const0"

    def test_tie_goes_to_zero(self):
        mix = majority_rule(4).train(labels(1, 1, 0, 0))
        assert mix.atoms[0][0].name == "const0"

    def test_majority_of_ones(self):
        mix = majority_rule(4).train(labels(1, 1, 1, 0))
        assert mix.atoms[0][0].name == "const1"


class TestCovExact:
    @pytest.mark.parametrize(
        "n,m,want",
        [(2, 1, Fraction(1, 4)), (4, 1, Fraction(1, 8)), (4, 2, Fraction(1, 16))],
    )
    def test_small_values(self, n, m, want):
        assert cov_exact(n, m) == want

    def test_invalid_fold_size(self):
        with pytest.raises(InvalidFoldSize):
            cov_exact(6, 4)  # m > n/2
        with pytest.raises(InvalidFoldSize):
            cov_exact(6, 5)  # not a divisor

    def test_brute_force_grid(self):
        for n in range(2, 13):
            for m in fold_size_divisors(n):
                assert cov_exact(n, m) == cov_bruteforce(n, m), (n, m)

    def test_positive(self):
        assert all(
            cov_exact(n, m) > 0 for n in range(2, 13) for m in fold_size_divisors(n)
        )


class TestCovConditional:
    @pytest.mark.parametrize("n,m", [(4, 1), (4, 2), (9, 3), (12, 4), (10, 5)])
    def test_equals_exact(self, n, m):
        assert cov_conditional(n, m) == cov_exact(n, m)

    def test_both_parities(self):
        odd = [(n, m) for n in range(2, 13) for m in fold_size_divisors(n) if (n - m) % 2]
        even = [(n, m) for n in range(2, 13) for m in fold_size_divisors(n) if (n - m) % 2 == 0]
        assert odd and even
        for n, m in odd + even:
            assert cov_conditional(n, m) == cov_exact(n, m), (n, m)


class TestApprox:
    def test_m1_closed_form(self):
        got = cov_approx(10, 1, "m1")
        assert got == pytest.approx(70 / 1024, abs=1e-15)
        assert got == pytest.approx(float(cov_exact(10, 1)))

    def test_half_closed_form_and_asymptote(self):
        got = cov_approx(100, 50, "half")
        exact = (2.0 ** -49 * math.comb(49, 25)) ** 2 / 4
        assert got == pytest.approx(exact, rel=1e-12)
        # approaches 1/(pi (n-2)) with an O(1/n) correction
        assert got == pytest.approx(1 / (98 * math.pi), rel=0.05)
        assert cov_approx(1000, 500, "half") == pytest.approx(1 / (998 * math.pi), rel=0.005)

    def test_binomial_form_close_at_large_n(self):
        got = cov_approx(3000, 100, "binomial")
        assert got == pytest.approx(float(cov_exact(3000, 100)), rel=0.05)

    def test_sublinear_form_close_at_large_n(self):
        for m in (30, 100, 300, 1000):
            got = cov_approx(3000, m, "sublinear")
            assert got == pytest.approx(float(cov_exact(3000, m)), rel=0.05)

    def test_form_domains(self):
        with pytest.raises(FormDomain):
            cov_approx(10, 2, "m1")
        with pytest.raises(FormDomain):
            cov_approx(10, 4, "half")
        with pytest.raises(FormDomain):
            cov_approx(10, 1, "sublinear")
        with pytest.raises(FormDomain):
            cov_approx(12, 5, "large")  # m > n/3


class TestMinimizer:
    def test_n300(self):
        m_star, k_star, rows = minimize_cov(300)
        assert (m_star, k_star) == (100, 3)

    def test_n12_table(self):
        m_star, _k, rows = minimize_cov(12)
        assert [r.m for r in rows] == [1, 2, 3, 4, 6]
        assert m_star == min(rows, key=lambda r: r.cov_exact).m

    def test_monotone_chain_n3000(self):
        _m, _k, rows = minimize_cov(3000)
        chain = [r for r in rows if r.m <= 1000]
        assert all(chain[i].cov_exact > chain[i + 1].cov_exact for i in range(len(chain) - 1))
        assert rows[-1].m == 1500 and rows[-1].cov_exact > chain[-1].cov_exact


class TestMse:
    @pytest.mark.parametrize(
        "n,m,want",
        [(4, 2, Fraction(3, 32)), (4, 1, Fraction(5, 32)), (2, 1, Fraction(1, 4))],
    )
    def test_closed_form(self, n, m, want):
        assert mse_majority(n, m) == want

    def test_matches_decompose_oracle(self):
        from cvrisk.decomposition import decompose
        from cvrisk.types import FiniteDistribution

        dist = FiniteDistribution.bernoulli_labels(Fraction(1, 2))
        for n, m in ((4, 2), (6, 2), (8, 4)):
            rep = decompose(majority_rule(n), dist, n, n // m)
            assert rep.mse == mse_majority(n, m)


def test_central_mass():
    assert central_mass(0) == CentralMass(0, Fraction(1))
    masses = [central_mass(r).value for r in range(10)]
    assert all(masses[i] > masses[i + 1] for i in range(9))


def test_comb0_out_of_range():
    assert comb0(4, -1) == 0
    assert comb0(4, 5) == 0
    assert comb0(0, 0) == 1
