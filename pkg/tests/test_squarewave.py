"""Square-wave rule: factorization identity, theta evaluation, constants."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cvrisk.squarewave import (
    SquareWaveParams,
    cov_bruteforce,
    cov_exact_factorized,
    epsilon_floor,
    f_exact,
    predicted_cov,
    square_wave_rule,
    squarewave_constants,
    theta_eval,
    theta_series,
)
from cvrisk.types import InvalidFoldSize, LabeledPoint, RTooSmall


def labels(*ys):
    return tuple(LabeledPoint("*", y) for y in ys)


class TestRule:
    def test_r1_two_ones(self):
        mix = square_wave_rule(1).train(labels(1, 1))
        assert mix.atoms[0][0].name == "const0"  # floor(2) even

    def test_r2_three_ones(self):
        mix = square_wave_rule(2).train(labels(1, 1, 1))
        assert mix.atoms[0][0].name == "const0"  # floor(3/sqrt(2)) = 2

    def test_r4_sum_three(self):
        mix = square_wave_rule(4).train(labels(1, 1, 1, 0))
        assert mix.atoms[0][0].name == "const1"  # floor(3/2) = 1


class TestEpsilonFloor:
    @pytest.mark.parametrize("u,m,want", [(5, 4, 1), (3, 2, 1), (0, 7, 1), (1, 1, -1)])
    def test_values(self, u, m, want):
        assert epsilon_floor(u, m) == want

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 5_000))
    def test_against_high_precision_floor(self, u, m):
        with mpmath.workdps(50):
            ref = int(mpmath.floor(u / mpmath.sqrt(m)))
        assert epsilon_floor(u, m) == (-1 if ref % 2 else 1)


class TestFExact:
    @pytest.mark.parametrize(
        "s,m,want",
        [(0, 1, Fraction(-1, 2)), (1, 1, Fraction(1, 2)), (0, 4, Fraction(-1, 8))],
    )
    def test_values(self, s, m, want):
        assert f_exact(s, m) == want


class TestCovFactorized:
    @pytest.mark.parametrize("n,m,want", [(3, 1, Fraction(1, 4)), (4, 1, Fraction(1, 4))])
    def test_m1_values(self, n, m, want):
        # at m = 1, f^2 is identically 1/4
        assert cov_exact_factorized(n, m) == want

    def test_brute_force_12_4(self):
        assert cov_exact_factorized(12, 4) == cov_bruteforce(12, 4)

    def test_brute_force_grid(self):
        for n in range(2, 15):
            for m in range(1, n // 2 + 1):
                if n % m == 0:
                    assert cov_exact_factorized(n, m) == cov_bruteforce(n, m), (n, m)

    def test_positive_when_R_at_least_one(self):
        for m in (1, 2, 3, 4):
            for R in (1, 2, 3):
                assert cov_exact_factorized(m * (R + 2), m) > 0

    def test_invalid(self):
        with pytest.raises(InvalidFoldSize):
            cov_exact_factorized(3, 2)


class TestTheta:
    def test_half_is_zero(self):
        assert abs(theta_eval(0.5, "lattice", 8)) < 1e-12
        assert abs(theta_eval(0.5, "series", 8)) < 1e-12

    def test_at_zero(self):
        # frozen from both evaluation routes agreeing to 1e-15
        assert theta_eval(0.0, "lattice", 5) == pytest.approx(0.7300003, abs=1e-6)

    def test_routes_agree(self):
        for i in range(0, 1000, 7):
            d = i / 1000
            assert abs(theta_eval(d, "lattice", 8) - theta_eval(d, "series", 8)) < 1e-12

    def test_truncation_floor(self):
        with pytest.raises(ValueError):
            theta_eval(0.1, "series", 2)

    def test_series_tail_bound(self):
        ts = theta_series(6)
        assert ts.tail_bound() < 1e-10
        cs = ts.coefficients
        assert all(cs[i] > cs[i + 1] > 0 for i in range(len(cs) - 1))


class TestConstants:
    def test_paper_values(self):
        c = squarewave_constants()
        assert c.c0 == pytest.approx(0.0424, abs=1e-4)
        assert c.c1 == pytest.approx(0.0212, abs=1e-4)
        assert c.delta(1) == pytest.approx(0.000329, abs=2e-6)
        assert c.tail_bound <= 1e-10

    def test_delta_decreasing_and_below_c0(self):
        c = squarewave_constants()
        ds = [c.delta(r) for r in range(1, 8)]
        assert all(a > b for a, b in zip(ds, ds[1:]))
        assert c.delta(1) < c.c0


class TestPredictedCov:
    def test_value_and_bound(self):
        v, b = predicted_cov(100, 2)
        c = squarewave_constants()
        assert v == pytest.approx(4.24e-4, rel=1e-2)
        assert b == pytest.approx(c.delta(2) / 100 + 100 ** -1.5)

    def test_r_zero_rejected(self):
        with pytest.raises(RTooSmall):
            predicted_cov(100, 0)

    def test_bound_holds_at_m256(self):
        v, b = predicted_cov(256, 2)
        got = float(cov_exact_factorized(1024, 256))
        assert abs(got - v) <= b


def test_params_for_theorem():
    p = SquareWaveParams.for_theorem(64, 2)
    assert (p.n, p.N, p.R, p.r) == (256, 128, 2, 64)


def test_one_over_m_scaling():
    c = squarewave_constants()
    for m in (64, 144):
        for R in (1, 2):
            cov = cov_exact_factorized(m * (R + 2), m)
            assert abs(m * float(cov) - c.c0) <= c.delta(R) + m ** -0.5
