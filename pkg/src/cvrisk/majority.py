"""Fold covariance of the majority algorithm: exact combinatorial and
conditional forms, named asymptotic approximations, the fold-count
minimizer, and the closed-form MSE under Ber(1/2) labels.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import brute
from .types import (
    H0,
    H1,
    HypothesisMixture,
    InvalidFoldSize,
    FormDomain,
    LearningRule,
)

_MIX0 = HypothesisMixture.point(H0)
_MIX1 = HypothesisMixture.point(H1)

_LN2 = math.log(2.0)


def comb0(a: int, b: int) -> int:
    """Binomial coefficient that is 0 outside 0 <= b <= a.

    The combinatorial covariance sum hits out-of-range lower indices at edge
    j values (e.g. n = 4, m = 2), which must contribute nothing.
    """
    if b < 0 or b > a or a < 0:
        return 0
    return math.comb(a, b)


def majority_rule(n: int) -> LearningRule:
    """Outputs constant-0 iff the training label sum Y satisfies Y <= size/2.

    Ties go to the zero hypothesis; no randomization.  The rule trains on
    samples of any size (fold complements have size n - m); ``n`` records the
    intended full-sample size.
    """
    if n < 1:
        raise ValueError("n must be >= 1")

    def train(pts):
        y = sum(pt.y for pt in pts)
        return _MIX0 if 2 * y <= len(pts) else _MIX1

    return LearningRule(name=f"majority(n={n})", train=train)


def _validate_nm(n: int, m: int) -> None:
    if n < 2 or m < 1 or m > n // 2 or n % m != 0:
        raise InvalidFoldSize(f"need m | n and 1 <= m <= n/2, got n={n}, m={m}")


@functools.lru_cache(maxsize=4096)
def cov_exact(n: int, m: int) -> Fraction:
    """Exact fold covariance 2^-n sum_j C(m-1,j)^2 C(n-2m, floor((n-m)/2)-j)."""
    _validate_nm(n, m)
    m0 = (n - m) // 2
    total = sum(
        math.comb(m - 1, j) ** 2 * comb0(n - 2 * m, m0 - j) for j in range(m)
    )
    return Fraction(total, 1 << n)


def cov_conditional(n: int, m: int) -> Fraction:
    """Conditional form (4/m^2) E_Y[C(m,Y)^2] with Y ~ Bin(n-2m, 1/2).

    C(m, Y) = (m/4) P(Bin(m-1, 1/2) = floor((n-m)/2) - Y).  The derivation in
    the source assumes n - m odd; the equality with ``cov_exact`` holds for
    both parities and is asserted by the verification suite rather than
    restricted here.
    """
    _validate_nm(n, m)
    N = n - 2 * m
    m0 = (n - m) // 2
    # C(m-1, m0 - t) vanishes outside m0-(m-1) <= t <= m0
    total = sum(
        math.comb(N, t) * math.comb(m - 1, m0 - t) ** 2
        for t in range(max(0, m0 - m + 1), min(N, m0) + 1)
    )
    # (1/4) * 2^-N * (2^-(m-1))^2 * total == total / 2^n
    return Fraction(total, 1 << n)


@dataclass(frozen=True)
class CentralMass:
    """S_r = 2^-2r * C(2r, r), the central binomial mass."""

    r: int
    value: Fraction


def central_mass(r: int) -> CentralMass:
    if r < 0:
        raise ValueError("r must be >= 0")
    return CentralMass(r=r, value=Fraction(math.comb(2 * r, r), 1 << (2 * r)))


def _log_binom(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _central_mass_float(r: int) -> float:
    # 2^-2r C(2r, r) via log-gamma; exact enough for approximation forms
    return math.exp(_log_binom(2 * r, r) - 2 * r * _LN2)


APPROX_FORMS = ("binomial", "sublinear", "m1", "half", "large")


def cov_approx(n: int, m: int, form: str) -> float:
    """Named floating-point approximation of the fold covariance.

    binomial   S_{m-1} / (2 sqrt(pi (2n-3m)))            for 1 <= m <= n/3
    sublinear  (1 - 1/(8(m-1))) / (2 pi sqrt((m-1)(2n-3m)))  for 2 <= m <= n/3
    large      1 / (2 pi sqrt((m-1)(2n-3m)))                for 2 <= m <= n/3
    m1         2^-n C(n-2, floor((n-1)/2))            exact closed form, m = 1
    half       2^-n C(n/2-1, floor(n/4))^2            exact closed form, m = n/2
    """
    if form == "m1":
        if m != 1:
            raise FormDomain("form 'm1' requires m = 1")
        return math.exp(_log_binom(n - 2, (n - 1) // 2) - n * _LN2)
    if form == "half":
        if n % 2 != 0 or m != n // 2:
            raise FormDomain("form 'half' requires even n and m = n/2")
        return math.exp(2 * _log_binom(n // 2 - 1, n // 4) - n * _LN2)
    if form == "binomial":
        if not 1 <= m <= n / 3:
            raise FormDomain("form 'binomial' requires 1 <= m <= n/3")
        return _central_mass_float(m - 1) / (2 * math.sqrt(math.pi * (2 * n - 3 * m)))
    if form == "sublinear":
        if not 2 <= m <= n / 3:
            raise FormDomain("form 'sublinear' requires 2 <= m <= n/3")
        return (1 - 1 / (8 * (m - 1))) / (
            2 * math.pi * math.sqrt((m - 1) * (2 * n - 3 * m))
        )
    if form == "large":
        if not 2 <= m <= n / 3:
            raise FormDomain("form 'large' requires 2 <= m <= n/3")
        return 1 / (2 * math.pi * math.sqrt((m - 1) * (2 * n - 3 * m)))
    raise FormDomain(f"unknown form {form!r}")


def default_form(n: int, m: int) -> str:
    """Approximation form used in sweep tables for a given (n, m)."""
    if m == 1:
        return "m1"
    if n % 2 == 0 and m == n // 2:
        return "half"
    return "sublinear"


def mse_majority(n: int, m: int) -> Fraction:
    """MSE of majority CV under Ber(1/2): ((k-1)/k) Cov(n,m) + 1/(4n)."""
    _validate_nm(n, m)
    k = n // m
    return Fraction(k - 1, k) * cov_exact(n, m) + Fraction(1, 4 * n)


@dataclass(frozen=True)
class MajorityCovRow:
    n: int
    m: int
    k: int
    cov_exact: Fraction
    cov_conditional: Fraction
    cov_approx: float
    cov_approx_form: str
    mse: Fraction


def cov_row(n: int, m: int) -> MajorityCovRow:
    form = default_form(n, m)
    return MajorityCovRow(
        n=n,
        m=m,
        k=n // m,
        cov_exact=cov_exact(n, m),
        cov_conditional=cov_conditional(n, m),
        cov_approx=cov_approx(n, m, form),
        cov_approx_form=form,
        mse=mse_majority(n, m),
    )


def fold_size_divisors(n: int) -> list[int]:
    """Divisors m of n with 1 <= m <= n/2, ascending."""
    return [m for m in range(1, n // 2 + 1) if n % m == 0]


def minimize_cov(n: int):
    """Evaluate the exact covariance over all valid divisors and minimize.

    Returns (m_star, k_star, rows).  For small n the argmin is empirical; the
    n/3 minimizer statement only applies for sufficiently large n.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rows = [cov_row(n, m) for m in fold_size_divisors(n)]
    best = min(rows, key=lambda r: (r.cov_exact, r.m))
    return best.m, best.k, rows


def cov_bruteforce(n: int, m: int) -> Fraction:
    """Enumeration oracle over all 2^n labelings (no combinatorial formula)."""
    _validate_nm(n, m)
    size = n - m
    return brute.fold_cov_bruteforce(n, m, lambda t: 1 if 2 * t > size else 0)
