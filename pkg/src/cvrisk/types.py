"""Domain types for samples, distributions, hypotheses, and fold schemes.

Everything here is an immutable value object, safe to share read-only between
threads.  Exact quantities are ``fractions.Fraction`` throughout; ``ExactValue``
is an alias for it.  Loss is fixed to 0-1 loss, which keeps every expectation
in closed rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Optional

ExactValue = Fraction

#: A sample is an ordered tuple of labeled points (i.i.d. draws).  Internal
#: training sets may be shorter than the top-level sample, and are empty in the
#: degenerate k=1 scheme.
SamplePoints = tuple["LabeledPoint", ...]
SampleTuple = SamplePoints


class CVRiskError(Exception):
    """Base class for all package errors."""


class NotDivisible(CVRiskError):
    """Fold count does not divide the sample size."""


class LengthMismatch(CVRiskError):
    """Sample length disagrees with the fold scheme."""


class DomainMismatch(CVRiskError):
    """Hypothesis and distribution cannot be combined (labels or missing paths)."""


class BudgetExceeded(CVRiskError):
    """Exhaustive enumeration would exceed the configured budget."""


class InvalidFoldSize(CVRiskError):
    """Fold size out of the valid range for the requested formula."""


class FormDomain(CVRiskError):
    """Approximation form evaluated outside its stated domain."""


class OutOfRange(CVRiskError):
    """Index parameter outside its combinatorial range."""


class Inconsistent(CVRiskError):
    """Linear system has no solution (non-realizable input)."""


class RTooSmall(CVRiskError):
    """No uniform covariance bound exists for R = 0."""


class InputMismatch(CVRiskError):
    """Report and profile were not computed on the same instance."""


@dataclass(frozen=True)
class LabeledPoint:
    """One observation z = (x, y).

    ``x`` is either an opaque feature token (rules that ignore features) or a
    tuple of prime-field elements.  ``y`` is a label in {0,1} or a field
    element; the label domain is fixed per distribution.
    """

    x: Hashable
    y: int


@dataclass(frozen=True)
class Hypothesis:
    """A predictor with an optional closed-form population risk.

    ``name`` must encode the hypothesis parameters: two hypotheses compare
    equal iff their names match, which the exact engine relies on for caching.
    ``closed_form_risk`` is used when the underlying distribution cannot be
    expressed as an explicit finite support (e.g. a continuous feature
    marginal); where both paths exist they must agree exactly.
    """

    name: str
    predict: Optional[Callable[[Hashable], int]] = field(
        default=None, compare=False, repr=False
    )
    closed_form_risk: Optional[Callable[["FiniteDistribution"], Fraction]] = field(
        default=None, compare=False, repr=False
    )

    def risk(self, dist: "FiniteDistribution") -> Fraction:
        """Population 0-1 risk, preferring the closed form when present."""
        if self.closed_form_risk is not None:
            return self.closed_form_risk(dist)
        return self.support_sum_risk(dist)

    def support_sum_risk(self, dist: "FiniteDistribution") -> Fraction:
        if self.predict is None:
            raise DomainMismatch(
                f"hypothesis {self.name!r} has neither a predictor nor a closed-form risk"
            )
        total = Fraction(0)
        for pt, mass in zip(dist.support, dist.masses):
            if self.predict(pt.x) != pt.y:
                total += mass
        return total


def constant_hypothesis(label: int) -> Hypothesis:
    """The constant predictor x -> label."""
    return Hypothesis(name=f"const{label}", predict=lambda _x, _c=label: _c)


H0 = constant_hypothesis(0)
H1 = constant_hypothesis(1)


@dataclass(frozen=True)
class FiniteDistribution:
    """Exact-mass distribution over labeled points.

    Masses are strictly positive rationals summing exactly to 1 and the
    support points are distinct.  Large implicit supports (uniform field
    vectors) are not represented here; rules over them work through
    closed-form conditional risks instead.
    """

    support: tuple[LabeledPoint, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.masses):
            raise ValueError("support and masses must have equal length")
        if not self.support:
            raise ValueError("support must be non-empty")
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be strictly positive")
        if sum(self.masses) != 1:
            raise ValueError("masses must sum exactly to 1")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support points must be distinct")

    @classmethod
    def from_pairs(cls, pairs) -> "FiniteDistribution":
        pts, ms = zip(*pairs)
        return cls(tuple(pts), tuple(Fraction(m) for m in ms))

    @classmethod
    def bernoulli_labels(cls, p, x: Hashable = "*") -> "FiniteDistribution":
        """Single feature token with label ~ Ber(p)."""
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if p == 0:
            return cls((LabeledPoint(x, 0),), (Fraction(1),))
        if p == 1:
            return cls((LabeledPoint(x, 1),), (Fraction(1),))
        return cls(
            (LabeledPoint(x, 0), LabeledPoint(x, 1)),
            (1 - p, p),
        )

    def label_mass(self, y: int) -> Fraction:
        return sum(
            (m for pt, m in zip(self.support, self.masses) if pt.y == y),
            Fraction(0),
        )

    def sample_index(self, u: float) -> int:
        """Index of the support point hit by uniform variate ``u``."""
        acc = 0.0
        for i, m in enumerate(self.masses):
            acc += float(m)
            if u < acc:
                return i
        return len(self.support) - 1

    def sample_tuple(self, rng, n: int) -> SamplePoints:
        """Draw n i.i.d. points using ``rng.random``."""
        us = rng.random(n)
        return tuple(self.support[self.sample_index(float(u))] for u in us)


@dataclass(frozen=True)
class HypothesisMixture:
    """Finite mixture of hypotheses; the internal randomness of a rule."""

    atoms: tuple[tuple[Hypothesis, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("mixture must have at least one atom")
        if any(p <= 0 for _, p in self.atoms):
            raise ValueError("atom probabilities must be positive")
        if sum(p for _, p in self.atoms) != 1:
            raise ValueError("atom probabilities must sum exactly to 1")

    @classmethod
    def point(cls, h: Hypothesis) -> "HypothesisMixture":
        return cls(((h, Fraction(1)),))

    def risk(self, dist: FiniteDistribution) -> Fraction:
        return sum((p * h.risk(dist) for h, p in self.atoms), Fraction(0))

    def realize(self, u: float) -> Hypothesis:
        """Atom hit by uniform variate ``u``."""
        acc = 0.0
        for h, p in self.atoms:
            acc += float(p)
            if u < acc:
                return h
        return self.atoms[-1][0]


@dataclass(frozen=True)
class LearningRule:
    """Symmetric map from a sample tuple to a hypothesis mixture.

    ``train`` must be permutation-invariant when ``symmetric`` is declared;
    the fold machinery assumes it.
    """

    name: str
    train: Callable[[SamplePoints], HypothesisMixture] = field(compare=False)
    symmetric: bool = True


def constant_rule(label: int = 0) -> LearningRule:
    """Rule that ignores the sample and always outputs the same hypothesis."""
    h = HypothesisMixture.point(constant_hypothesis(label))
    return LearningRule(name=f"constant{label}", train=lambda _s, _h=h: _h)


@dataclass(frozen=True)
class FoldScheme:
    """k contiguous blocks of size m = n/k partitioning 0-based indices 0..n-1."""

    n: int
    k: int
    m: int
    blocks: tuple[tuple[int, ...], ...]


def partition_folds(n: int, k: int) -> FoldScheme:
    """Contiguous equal-size partition of the index set.

    Raises NotDivisible when k does not divide n.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if n % k != 0:
        raise NotDivisible(f"k={k} does not divide n={n}")
    m = n // k
    blocks = tuple(tuple(range(i * m, (i + 1) * m)) for i in range(k))
    return FoldScheme(n=n, k=k, m=m, blocks=blocks)


def population_risk(mix: HypothesisMixture, dist: FiniteDistribution) -> Fraction:
    """Mixture-weighted expected 0-1 loss over the distribution."""
    return mix.risk(dist)


def holdout_loss(h: Hypothesis, points: SamplePoints) -> Fraction:
    """Average 0-1 loss of ``h`` on the given hold-out points."""
    if h.predict is None:
        raise DomainMismatch(
            f"hypothesis {h.name!r} has no pointwise predictor for hold-out evaluation"
        )
    miss = sum(1 for pt in points if h.predict(pt.x) != pt.y)
    return Fraction(miss, len(points))


def cv_estimate(rule: LearningRule, sample: SamplePoints, scheme: FoldScheme) -> Fraction:
    """k-fold CV estimate: fold-averaged, mixture-expected hold-out loss."""
    if len(sample) != scheme.n:
        raise LengthMismatch(
            f"sample length {len(sample)} != scheme.n {scheme.n}"
        )
    total = Fraction(0)
    for block in scheme.blocks:
        held = tuple(sample[j] for j in block)
        train_pts = tuple(
            sample[j] for j in range(scheme.n) if j not in set(block)
        )
        mix = rule.train(train_pts)
        total += sum(
            (p * holdout_loss(h, held) for h, p in mix.atoms), Fraction(0)
        )
    return total / scheme.k


@dataclass(frozen=True)
class EstimateWithError:
    """Monte Carlo estimate with its standard error.

    ``std_error`` is the sample standard deviation of the per-trial statistic
    divided by sqrt(trials); results are a pure function of
    (master_seed, trials, inputs), never of the execution schedule.
    """

    value: float
    std_error: float
    trials: int
    master_seed: int

    def within(self, target, sigmas: float) -> bool:
        return abs(self.value - float(target)) <= sigmas * self.std_error


def float_of(x) -> float:
    """Uniform float conversion for Fractions, EstimateWithError, and floats."""
    if isinstance(x, EstimateWithError):
        return x.value
    return float(x)


def isqrt_floor_ratio(u: int, m: int) -> int:
    """floor(u / sqrt(m)) for nonnegative integers, in exact integer arithmetic.

    Uses the characterization t^2 * m <= u^2 < (t+1)^2 * m, avoiding any
    floating-point boundary misclassification.
    """
    if u < 0 or m < 1:
        raise ValueError("need u >= 0 and m >= 1")
    t = math.isqrt((u * u) // m)
    return t
