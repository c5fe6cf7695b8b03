"""Exhaustive expectation engine in exact rational arithmetic.

Expectations are taken over D^n as an ordered product (matching i.i.d.
tuple semantics) and over the independent internal randomness of the k
fold-complement trainings plus the full-sample training.  Per-fold
hypotheses are realized independently, so all functionals refer to the
risk/loss of the *realized* model of each training, not a mixture-averaged
surrogate.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .types import (
    BudgetExceeded,
    DomainMismatch,
    FiniteDistribution,
    HypothesisMixture,
    LearningRule,
    partition_folds,
)

DEFAULT_BUDGET = 1 << 24

FUNCTIONALS = (
    "mse",
    "sls",
    "fold_cov",
    "per_fold_noise",
    "corr_hold",
    "corr_risk",
    "loss_var",
    "mean",
)

_ZERO = Fraction(0)


class _Ctx:
    """Shared caches for one enumeration run."""

    def __init__(self, rule: LearningRule, dist: FiniteDistribution, budget: int):
        self.rule = rule
        self.dist = dist
        self.budget = budget
        self.terms = 0
        self._train_cache: dict = {}
        self._risk_cache: dict = {}

    def train(self, pts) -> HypothesisMixture:
        mix = self._train_cache.get(pts)
        if mix is None:
            mix = self.rule.train(pts)
            self._train_cache[pts] = mix
        self.terms += len(mix.atoms)
        if self.terms > self.budget:
            raise BudgetExceeded(
                f"enumeration exceeded budget of {self.budget} weighted terms"
            )
        return mix

    def risk(self, h) -> Fraction:
        r = self._risk_cache.get(h)
        if r is None:
            r = h.risk(self.dist)
            self._risk_cache[h] = r
        return r


def _tuple_weights(dist: FiniteDistribution, n: int):
    """Yield (points, weight) over the ordered support product."""
    support = dist.support
    masses = dist.masses
    for idxs in itertools.product(range(len(support)), repeat=n):
        w = Fraction(1)
        for i in idxs:
            w *= masses[i]
        yield tuple(support[i] for i in idxs), w


def _check_budget(dist: FiniteDistribution, n: int, budget: int) -> None:
    if len(dist.support) ** n > budget:
        raise BudgetExceeded(
            f"|support|^n = {len(dist.support)}^{n} exceeds budget {budget}"
        )


def _mixture_risk_moments(ctx: _Ctx, mix: HypothesisMixture):
    """(E[L], E[L^2]) of the realized risk under one mixture."""
    m1 = _ZERO
    m2 = _ZERO
    for h, p in mix.atoms:
        r = ctx.risk(h)
        m1 += p * r
        m2 += p * r * r
    return m1, m2


def _fold_atom_stats(ctx: _Ctx, mix: HypothesisMixture, held):
    """Per-fold conditional moments over the mixture, given the sample.

    Returns (A, A2, B, B2, noise) = (E[Lhat], E[Lhat^2], E[L], E[L^2],
    E[L(1-L)]) where Lhat is the hold-out loss and L the risk of the
    realized fold hypothesis.
    """
    m = len(held)
    A = A2 = B = B2 = noise = _ZERO
    for h, p in mix.atoms:
        pred = h.predict
        if pred is None:
            raise DomainMismatch(
                f"fold hypothesis {h.name!r} has no pointwise predictor"
            )
        miss = 0
        for pt in held:
            if pred(pt.x) != pt.y:
                miss += 1
        lhat = Fraction(miss, m)
        r = ctx.risk(h)
        A += p * lhat
        A2 += p * lhat * lhat
        B += p * r
        B2 += p * r * r
        noise += p * r * (1 - r)
    return A, A2, B, B2, noise


def risk_moments(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    budget: int = DEFAULT_BUDGET,
):
    """(E[L_n], E[L_n^2]) of the realized full-sample risk at size n."""
    _check_budget(dist, n, budget)
    ctx = _Ctx(rule, dist, budget)
    m1 = _ZERO
    m2 = _ZERO
    for pts, w in _tuple_weights(dist, n):
        a, b = _mixture_risk_moments(ctx, ctx.train(pts))
        m1 += w * a
        m2 += w * b
    return m1, m2


def decomposition_pass(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    k: int,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """One joint enumeration yielding every term of the MSE decomposition.

    For k = 1 the pair-covariance terms carry a vanishing k-dependent
    coefficient; they are reported as exact zeros.
    """
    scheme = partition_folds(n, k)
    _check_budget(dist, n, budget)
    ctx = _Ctx(rule, dist, budget)
    m = scheme.m
    blocks = scheme.blocks
    block_sets = [frozenset(b) for b in blocks]

    e_L = e_L2 = _ZERO
    e_Lhat = e_Lhat_sq = e_LhatL = _ZERO
    e_Ltilde_sq = e_LtildeL = _ZERO
    e_A1 = e_A2f = e_A3f = e_A1A2 = e_A1A3 = _ZERO
    e_B1 = e_B2f = e_B1B2 = _ZERO
    e_noise = _ZERO
    e_LxB1mA1 = _ZERO

    for pts, w in _tuple_weights(dist, n):
        C1, C2 = _mixture_risk_moments(ctx, ctx.train(pts))

        As, A2s, Bs, B2s = [], [], [], []
        noise1 = None
        for i in range(k):
            held = tuple(pts[j] for j in blocks[i])
            train_pts = tuple(
                pts[j] for j in range(n) if j not in block_sets[i]
            )
            A, A2, B, B2, nz = _fold_atom_stats(ctx, ctx.train(train_pts), held)
            As.append(A)
            A2s.append(A2)
            Bs.append(B)
            B2s.append(B2)
            if i == 0:
                noise1 = nz

        sumA = sum(As, _ZERO)
        sumB = sum(Bs, _ZERO)
        # E[Lhat^2 | s] over independent fold randomness:
        # (1/k^2) (sum_i E[Lhat_i^2] + sum_{i != j} A_i A_j)
        cross_A = sumA * sumA - sum((a * a for a in As), _ZERO)
        cross_B = sumB * sumB - sum((b * b for b in Bs), _ZERO)
        lhat_sq = (sum(A2s, _ZERO) + cross_A) / (k * k)
        ltilde_sq = (sum(B2s, _ZERO) + cross_B) / (k * k)

        e_L += w * C1
        e_L2 += w * C2
        e_Lhat += w * sumA / k
        e_Lhat_sq += w * lhat_sq
        e_LhatL += w * C1 * sumA / k
        e_Ltilde_sq += w * ltilde_sq
        e_LtildeL += w * C1 * sumB / k
        e_A1 += w * As[0]
        e_B1 += w * Bs[0]
        e_noise += w * noise1
        e_LxB1mA1 += w * C1 * (Bs[0] - As[0])
        if k >= 2:
            e_A2f += w * As[1]
            e_B2f += w * Bs[1]
            e_A1A2 += w * As[0] * As[1]
            e_B1B2 += w * Bs[0] * Bs[1]
        if k >= 3:
            e_A3f += w * As[2]
            e_A1A3 += w * As[0] * As[2]

    mse = e_Lhat_sq - 2 * e_LhatL + e_L2
    sls = e_Ltilde_sq - 2 * e_LtildeL + e_L2
    if k >= 2:
        fold_cov = e_A1A2 - e_A1 * e_A2f
        corr_risk = Fraction(k - 1, k) * (e_B1B2 - e_B1 * e_B2f)
    else:
        fold_cov = _ZERO
        corr_risk = _ZERO
    corr_hold = 2 * (e_LxB1mA1 - e_L * (e_B1 - e_A1))
    out = {
        "n": n,
        "k": k,
        "m": m,
        "mse": mse,
        "sls": sls,
        "fold_cov": fold_cov,
        "per_fold_noise": e_noise,
        "corr_hold": corr_hold,
        "corr_risk": corr_risk,
        "mean": e_L,
        "loss_var": e_L2 - e_L * e_L,
        "mean_cv": e_Lhat,
    }
    if k >= 3:
        out["fold_cov_13"] = e_A1A3 - e_A1 * e_A3f
    return out


def exact_functional(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    k: int,
    functional: str,
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    """Exact expectation of a named functional over D^n and rule randomness.

    ``loss_var`` and ``mean`` are full-sample quantities at size n; the fold
    count is ignored for them.
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    if functional in ("loss_var", "mean"):
        m1, m2 = risk_moments(rule, dist, n, budget)
        return m1 if functional == "mean" else m2 - m1 * m1
    return decomposition_pass(rule, dist, n, k, budget)[functional]


def stability_pass(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    m: int,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """Joint enumeration for the classical stability quantities at removal m.

    The large model trains on all n points, the small one on the first n-m
    (WLOG by symmetry and i.i.d. sampling).  Hypothesis stability is None
    when some hypothesis lacks a pointwise predictor.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    _check_budget(dist, n, budget)
    ctx = _Ctx(rule, dist, budget)

    mean_n = m2_n = _ZERO
    mean_t = m2_t = _ZERO
    beta2 = _ZERO
    beta1 = _ZERO
    beta1_ok = True
    disagree_cache: dict = {}

    def disagreement(hb, hs) -> Fraction:
        keypair = (hb, hs)
        val = disagree_cache.get(keypair)
        if val is None:
            total = _ZERO
            for pt, mass in zip(dist.support, dist.masses):
                if hb.predict(pt.x) != hs.predict(pt.x):
                    total += mass
            disagree_cache[keypair] = total
            val = total
        return val

    for pts, w in _tuple_weights(dist, n):
        mix_b = ctx.train(pts)
        mix_s = ctx.train(pts[: n - m])
        for hb, pb in mix_b.atoms:
            rb = ctx.risk(hb)
            mean_n += w * pb * rb
            m2_n += w * pb * rb * rb
        for hs, ps in mix_s.atoms:
            rs = ctx.risk(hs)
            mean_t += w * ps * rs
            m2_t += w * ps * rs * rs
        for hb, pb in mix_b.atoms:
            rb = ctx.risk(hb)
            for hs, ps in mix_s.atoms:
                rs = ctx.risk(hs)
                beta2 += w * pb * ps * abs(rb - rs)
                if beta1_ok:
                    if hb.predict is None or hs.predict is None:
                        beta1_ok = False
                    else:
                        beta1 += w * pb * ps * disagreement(hb, hs)

    return {
        "mean_risk_n": mean_n,
        "risk_var_n": m2_n - mean_n * mean_n,
        "mean_risk_train": mean_t,
        "risk_var_train": m2_t - mean_t * mean_t,
        "loss_stability": beta2,
        "hypothesis_stability": beta1 if beta1_ok else None,
    }
