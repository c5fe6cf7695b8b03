"""Five-term decomposition of the CV mean-squared error, stability
estimators, and the associated inequality suite.

In exact mode the residual of ``decompose`` is exactly zero as a rational
number; this is the decomposition identity as executable code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from . import exact as _exact
from . import mc as _mc
from .types import (
    DomainMismatch,
    EstimateWithError,
    FiniteDistribution,
    H0,
    Hypothesis,
    HypothesisMixture,
    InputMismatch,
    LearningRule,
    float_of,
    partition_folds,
)

Value = Union[Fraction, EstimateWithError]

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class DecompositionReport:
    """The five decomposition terms plus the residual of the identity.

    ``corr_hold`` is 2 Cov(L, L1 - Lhat1) and ``corr_risk`` is
    ((k-1)/k) Cov(L1, L2); both already carry their prefactors, so

        mse = sls + ((k-1)/k) inter_fold_cov + (1/k) per_fold_noise/m
              + corr_hold - corr_risk + residual.
    """

    n: int
    k: int
    m: int
    mode: str
    mse: Value
    sls: Value
    inter_fold_cov: Value
    per_fold_noise: Value
    corr_hold: Value
    corr_risk: Value
    residual: Union[Fraction, float]


@dataclass(frozen=True)
class StabilityProfile:
    """Classical stability quantities at sample size n and removal size m.

    ``hypothesis_stability`` is None when some hypothesis has no pointwise
    predictor (e.g. the anticorrelated fixture's interval hypothesis);
    ``sls_beta`` is None when m does not divide n, since the symmetrized
    leave-m loss needs the fold structure.
    """

    n: int
    m: int
    mode: str
    sls_beta: Optional[Value]
    loss_stability: Value
    hypothesis_stability: Optional[Value]
    risk_var_n: Value
    risk_var_train: Value
    mean_risk_n: Value
    mean_risk_train: Value


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool
    slack: float


def decompose(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    k: int,
    mode: str = "exact",
    trials: int = 0,
    seed: int = 0,
    budget: int = _exact.DEFAULT_BUDGET,
    threads: int | None = None,
) -> DecompositionReport:
    """All decomposition terms from one joint expectation pass."""
    scheme = partition_folds(n, k)
    if mode == "exact":
        t = _exact.decomposition_pass(rule, dist, n, k, budget)
        residual = t["mse"] - (
            t["sls"]
            + Fraction(k - 1, k) * t["fold_cov"]
            + Fraction(1, k) * t["per_fold_noise"] / scheme.m
            + t["corr_hold"]
            - t["corr_risk"]
        )
        return DecompositionReport(
            n=n,
            k=k,
            m=scheme.m,
            mode="exact",
            mse=t["mse"],
            sls=t["sls"],
            inter_fold_cov=t["fold_cov"],
            per_fold_noise=t["per_fold_noise"],
            corr_hold=t["corr_hold"],
            corr_risk=t["corr_risk"],
            residual=residual,
        )
    if mode != "mc":
        raise ValueError("mode must be 'exact' or 'mc'")
    if trials < 2:
        raise ValueError("mc mode needs trials >= 2")
    est = {
        f: _mc.mc_functional(rule, dist, n, k, f, trials, seed, threads)
        for f in ("mse", "sls", "fold_cov", "per_fold_noise", "corr_hold", "corr_risk")
    }
    residual = est["mse"].value - (
        est["sls"].value
        + (k - 1) / k * est["fold_cov"].value
        + est["per_fold_noise"].value / (k * scheme.m)
        + est["corr_hold"].value
        - est["corr_risk"].value
    )
    return DecompositionReport(
        n=n,
        k=k,
        m=scheme.m,
        mode="mc",
        mse=est["mse"],
        sls=est["sls"],
        inter_fold_cov=est["fold_cov"],
        per_fold_noise=est["per_fold_noise"],
        corr_hold=est["corr_hold"],
        corr_risk=est["corr_risk"],
        residual=residual,
    )


def stability_estimates(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    m: int,
    mode: str = "exact",
    trials: int = 0,
    seed: int = 0,
    budget: int = _exact.DEFAULT_BUDGET,
    threads: int | None = None,
) -> StabilityProfile:
    """Stability profile at removal size m (training size n - m)."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    if mode == "exact":
        t = _exact.stability_pass(rule, dist, n, m, budget)
        sls_beta = None
        if n % m == 0:
            sls_beta = _exact.decomposition_pass(rule, dist, n, n // m, budget)["sls"]
        return StabilityProfile(
            n=n,
            m=m,
            mode="exact",
            sls_beta=sls_beta,
            loss_stability=t["loss_stability"],
            hypothesis_stability=t["hypothesis_stability"],
            risk_var_n=t["risk_var_n"],
            risk_var_train=t["risk_var_train"],
            mean_risk_n=t["mean_risk_n"],
            mean_risk_train=t["mean_risk_train"],
        )
    if mode != "mc":
        raise ValueError("mode must be 'exact' or 'mc'")
    return _mc_stability(rule, dist, n, m, trials, seed, threads)


def _mc_stability(rule, dist, n, m, trials, seed, threads) -> StabilityProfile:
    if trials < 2:
        raise ValueError("mc mode needs trials >= 2")
    mom_b = _mc._Moments()
    mom_t = _mc._Moments()
    mom_abs = _mc._Moments()
    mom_dis = _mc._Moments()
    risk_cache: dict = {}
    beta1_ok = True
    for t in range(trials):
        rng = _mc.trial_rng(seed, t)
        pts = dist.sample_tuple(rng, n + 1)
        test = pts[n]
        pts = pts[:n]
        us = rng.random(2)
        hb = rule.train(pts).realize(float(us[0]))
        hs = rule.train(pts[: n - m]).realize(float(us[1]))
        rb = risk_cache.setdefault(hb, hb.risk(dist))
        rs = risk_cache.setdefault(hs, hs.risk(dist))
        mom_b.add(rb, rb)
        mom_t.add(rs, rs)
        mom_abs.add(abs(rb - rs), _ZERO)
        if beta1_ok and (hb.predict is None or hs.predict is None):
            beta1_ok = False
        if beta1_ok:
            d = Fraction(1) if hb.predict(test.x) != hs.predict(test.x) else _ZERO
            mom_dis.add(d, _ZERO)
    sls_beta = None
    if n % m == 0:
        sls_beta = _mc.mc_functional(
            rule, dist, n, n // m, "sls", trials, seed, threads
        )

    def mean_est(mom):
        v, se = mom.mean_estimate()
        return EstimateWithError(v, se, trials, seed)

    def var_est(mom):
        v, se = mom.var_estimate()
        return EstimateWithError(v, se, trials, seed)

    return StabilityProfile(
        n=n,
        m=m,
        mode="mc",
        sls_beta=sls_beta,
        loss_stability=mean_est(mom_abs),
        hypothesis_stability=mean_est(mom_dis) if beta1_ok else None,
        risk_var_n=var_est(mom_b),
        risk_var_train=var_est(mom_t),
        mean_risk_n=mean_est(mom_b),
        mean_risk_train=mean_est(mom_t),
    )


def _holds_leq_plus_2sqrt(lhs: Fraction, base: Fraction, rad: Fraction) -> bool:
    """Exact decision of lhs <= base + 2*sqrt(rad) for rationals, rad >= 0."""
    t = lhs - base
    if t <= 0:
        return True
    return t * t <= 4 * rad


def _check(name: str, lhs, rhs, holds: bool) -> BoundCheck:
    lhs_f = float_of(lhs) if not isinstance(lhs, float) else lhs
    rhs_f = float_of(rhs) if not isinstance(rhs, float) else rhs
    slack = rhs_f - lhs_f
    if (slack >= 0) != holds:
        # float roundoff at an exact boundary; snap to the exact decision
        slack = 0.0 if holds else -0.0
    return BoundCheck(name=name, lhs=lhs_f, rhs=rhs_f, holds=holds, slack=slack)


def bound_suite(report: DecompositionReport, prof: StabilityProfile) -> list[BoundCheck]:
    """The five inequality checks, in order:

    (i)   correction magnitude, (ii) fold-covariance range,
    (iii) per-fold noise vs expected Bernoulli variance,
    (iv)  two-sided squared-loss-stability bounds, (v) MSE lower bound.

    In exact mode every comparison is decided in rational arithmetic
    (square-root terms via conditional squaring).
    """
    if report.n != prof.n or report.m != prof.m:
        raise InputMismatch(
            f"report (n={report.n}, m={report.m}) vs profile (n={prof.n}, m={prof.m})"
        )
    exact = report.mode == "exact" and prof.mode == "exact"
    n, k, m = report.n, report.k, report.m

    if exact:
        mse, sls = report.mse, report.sls
        cov = report.inter_fold_cov
        noise = report.per_fold_noise
        corr = report.corr_hold - report.corr_risk
        var_n, var_t = prof.risk_var_n, prof.risk_var_train
        mean_n, mean_t = prof.mean_risk_n, prof.mean_risk_train
    else:
        mse, sls = float_of(report.mse), float_of(report.sls)
        cov = float_of(report.inter_fold_cov)
        noise = float_of(report.per_fold_noise)
        corr = float_of(report.corr_hold) - float_of(report.corr_risk)
        var_n, var_t = float_of(prof.risk_var_n), float_of(prof.risk_var_train)
        mean_n, mean_t = float_of(prof.mean_risk_n), float_of(prof.mean_risk_train)

    checks = []
    rad = var_n * noise / m if exact else max(var_n * noise / m, 0.0)
    two_sqrt = 2 * math.sqrt(float(rad))
    kfrac = Fraction(k - 1, k) if exact else (k - 1) / k

    # (i) |corr_hold - corr_risk| <= ((k-1)/k) var_{n-m} + 2 sqrt(var_n noise / m)
    lhs = abs(corr)
    base = kfrac * var_t
    holds = (
        _holds_leq_plus_2sqrt(lhs, base, rad)
        if exact
        else lhs <= float(base) + two_sqrt
    )
    checks.append(_check("correction-magnitude", lhs, float(base) + two_sqrt, holds))

    # (ii) -1/(4(n-m)) <= cov <= var_{n-m} + 1/(4m)
    low = Fraction(-1, 4 * (n - m)) if exact else -1 / (4 * (n - m))
    up = var_t + (Fraction(1, 4 * m) if exact else 1 / (4 * m))
    lo_slack = cov - low
    up_slack = up - cov
    holds = lo_slack >= 0 and up_slack >= 0
    if lo_slack <= up_slack:
        checks.append(_check("fold-cov-range", low, cov, holds))
    else:
        checks.append(_check("fold-cov-range", cov, up, holds))

    # (iii) noise <= E[L1 (1 - L1)] <= 1/4
    bern = mean_t - var_t - mean_t * mean_t
    bern = bern if exact else float(bern)
    quarter = Fraction(1, 4) if exact else 0.25
    first = bern - noise
    second = quarter - bern
    holds = first >= 0 and second >= 0
    if first <= second:
        checks.append(_check("noise-bhatia-davis", noise, bern, holds))
    else:
        checks.append(_check("noise-bhatia-davis", bern, quarter, holds))

    # (iv) (mean_t - mean_n)^2 <= sls <= (sd_t + sd_n)^2 + (mean_t - mean_n)^2
    gap2 = (mean_t - mean_n) ** 2
    lo_holds = sls - gap2 >= 0
    if exact:
        up_holds = _holds_leq_plus_2sqrt(sls - gap2 - var_t - var_n, _ZERO, var_t * var_n)
    else:
        up_holds = sls <= (math.sqrt(max(var_t, 0.0)) + math.sqrt(max(var_n, 0.0))) ** 2 + gap2 + 1e-15
    up_val = (math.sqrt(max(float(var_t), 0.0)) + math.sqrt(max(float(var_n), 0.0))) ** 2 + float(gap2)
    holds = lo_holds and up_holds
    lo_slack_f = float(sls) - float(gap2)
    up_slack_f = up_val - float(sls)
    if lo_slack_f <= up_slack_f:
        checks.append(_check("sls-two-sided", gap2, sls, holds))
    else:
        checks.append(_check("sls-two-sided", sls, up_val, holds))

    # (v) mse >= sls - 1/(2n) - var_{n-m} - 2 sqrt(var_n noise / m)
    half_n = Fraction(1, 2 * n) if exact else 1 / (2 * n)
    if exact:
        holds = _holds_leq_plus_2sqrt(sls - half_n - var_t - mse, _ZERO, rad)
    else:
        holds = mse >= float(sls) - float(half_n) - float(var_t) - two_sqrt - 1e-15
    lower = float(sls) - float(half_n) - float(var_t) - two_sqrt
    checks.append(_check("mse-lower", lower, mse, holds))
    return checks


def _interval_intersection_length(a1: Fraction, b1: Fraction, a2: Fraction, b2: Fraction) -> Fraction:
    lo = max(a1, a2)
    hi = min(b1, b2)
    return hi - lo if hi > lo else _ZERO


def interval_hypothesis(p: Fraction, token: str) -> Hypothesis:
    """Indicator of (1/2 - p/2, 1 - p/2) over a uniform-[0,1] feature marginal.

    There is no pointwise predictor (the marginal is never discretized); the
    risk against the threshold concept 1{x > 1/2} is the exact symmetric
    difference measure, which works out to p.
    """
    p = Fraction(p)
    a, b = _HALF - p / 2, 1 - p / 2
    risk = (b - a) + _HALF - 2 * _interval_intersection_length(a, b, _HALF, Fraction(1))

    def closed_form(dist: FiniteDistribution, _r=risk, _tok=token) -> Fraction:
        if dist.label_mass(1) != _HALF or any(pt.x != _tok for pt in dist.support):
            raise DomainMismatch(
                "interval hypothesis risk is derived for the anticorrelated fixture only"
            )
        return _r

    return Hypothesis(name=f"interval[{a},{b}]", predict=None, closed_form_risk=closed_form)


def anticorr_fixture(n: int):
    """Rule/distribution pair with MSE 0 but nonzero squared loss stability.

    Trained on the full n points the rule outputs an interval indicator whose
    risk equals the sample label fraction; trained on anything smaller it
    outputs the constant-zero hypothesis.  Labels are Ber(1/2) over a single
    feature token standing in for the uniform-[0,1] marginal.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("fixture is defined for even n >= 2")
    token = "u01"
    dist = FiniteDistribution.bernoulli_labels(_HALF, x=token)
    h0 = HypothesisMixture.point(H0)

    def train(pts, _n=n, _tok=token):
        if len(pts) == _n:
            p = Fraction(sum(pt.y for pt in pts), _n)
            return HypothesisMixture.point(interval_hypothesis(p, _tok))
        return h0

    return LearningRule(name=f"anticorr(n={n})", train=train), dist
