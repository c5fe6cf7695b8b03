"""Seeded Monte Carlo engine.

Per-trial randomness is derived only from (master_seed, trial index) via
numpy SeedSequence, and all reductions are carried out in exact rational
arithmetic, so results are a pure function of (seed, trials, inputs) and in
particular independent of the thread count used to run the trials.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .exact import FUNCTIONALS
from .types import (
    EstimateWithError,
    FiniteDistribution,
    LearningRule,
    partition_folds,
)

_ZERO = Fraction(0)

THREADS_ENV = "CVRISK_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, stable across schedules."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((master_seed, trial)))
    )


class _Moments:
    """Exact accumulator of mixed moments of a per-trial pair (x, y)."""

    __slots__ = ("n", "sx", "sx2", "sy", "sy2", "sxy", "sx2y", "sxy2", "sx2y2")

    def __init__(self):
        self.n = 0
        self.sx = self.sx2 = self.sy = self.sy2 = _ZERO
        self.sxy = self.sx2y = self.sxy2 = self.sx2y2 = _ZERO

    def add(self, x: Fraction, y: Fraction) -> None:
        self.n += 1
        x2 = x * x
        y2 = y * y
        self.sx += x
        self.sx2 += x2
        self.sy += y
        self.sy2 += y2
        self.sxy += x * y
        self.sx2y += x2 * y
        self.sxy2 += x * y2
        self.sx2y2 += x2 * y2

    def merge(self, other: "_Moments") -> None:
        self.n += other.n
        self.sx += other.sx
        self.sx2 += other.sx2
        self.sy += other.sy
        self.sy2 += other.sy2
        self.sxy += other.sxy
        self.sx2y += other.sx2y
        self.sxy2 += other.sxy2
        self.sx2y2 += other.sx2y2

    # -- estimators ---------------------------------------------------

    def mean_estimate(self):
        T = self.n
        mean = self.sx / T
        var = (self.sx2 - self.sx * self.sx / T) / (T - 1)
        se = math.sqrt(float(var) / T) if var > 0 else 0.0
        return float(mean), se

    def cov_estimate(self):
        """Unbiased sample covariance of (x, y) and the asymptotic standard
        error sd((x - xbar)(y - ybar)) / sqrt(T)."""
        T = self.n
        sum_h = self.sxy - self.sx * self.sy / T
        cov = sum_h / (T - 1)
        xb = self.sx / T
        yb = self.sy / T
        sum_h2 = (
            self.sx2y2
            + xb * xb * self.sy2
            + yb * yb * self.sx2
            + T * xb * xb * yb * yb
            - 2 * xb * self.sxy2
            - 2 * yb * self.sx2y
            + 4 * xb * yb * self.sxy
            - 2 * xb * xb * yb * self.sy
            - 2 * xb * yb * yb * self.sx
        )
        var_h = (sum_h2 - sum_h * sum_h / T) / (T - 1)
        se = math.sqrt(float(var_h) / T) if var_h > 0 else 0.0
        return float(cov), se

    def var_estimate(self):
        """Unbiased sample variance of x with a plug-in standard error from
        the centered squares g = (x - xbar)^2."""
        T = self.n
        sum_g = self.sx2 - self.sx * self.sx / T
        var = sum_g / (T - 1)
        xb = self.sx / T
        # moments of g = x^2 - 2 xb x + xb^2  (requires 4th moments of x)
        # reuse with y := x, so x^2 y^2 = x^4 and x^2 y = x^3.
        sum_g2 = (
            self.sx2y2
            - 4 * xb * self.sx2y
            + 6 * xb * xb * self.sx2
            - 4 * xb * xb * xb * self.sx
            + T * xb ** 4
        )
        var_g = (sum_g2 - sum_g * sum_g / T) / (T - 1)
        se = math.sqrt(float(var_g) / T) if var_g > 0 else 0.0
        return float(var), se


def _realize(mix, u: float):
    return mix.realize(u)


def _trial_values(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    k: int,
    functional: str,
    risk_cache: dict,
    rng: np.random.Generator,
):
    """Per-trial pair (x, y) for the requested functional.

    Mean-type functionals return (x, x); covariance-type return the raw
    pair whose covariance is estimated.
    """
    scheme = partition_folds(n, k)
    m = scheme.m
    pts = dist.sample_tuple(rng, n)
    us = rng.random(k + 1)

    def risk_of(h):
        r = risk_cache.get(h)
        if r is None:
            r = h.risk(dist)
            risk_cache[h] = r
        return r

    if functional in ("mean", "loss_var"):
        h = _realize(rule.train(pts), float(us[0]))
        L = risk_of(h)
        return L, L

    lhats = []
    risks = []
    for i, block in enumerate(scheme.blocks):
        bs = set(block)
        train_pts = tuple(pts[j] for j in range(n) if j not in bs)
        h = _realize(rule.train(train_pts), float(us[i]))
        miss = sum(1 for j in block if h.predict(pts[j].x) != pts[j].y)
        lhats.append(Fraction(miss, m))
        risks.append(risk_of(h))
    h_full = _realize(rule.train(pts), float(us[k]))
    L = risk_of(h_full)

    if functional == "mse":
        v = (sum(lhats, _ZERO) / k - L) ** 2
        return v, v
    if functional == "sls":
        v = (sum(risks, _ZERO) / k - L) ** 2
        return v, v
    if functional == "per_fold_noise":
        v = risks[0] * (1 - risks[0])
        return v, v
    if functional == "fold_cov":
        return lhats[0], lhats[1]
    if functional == "corr_hold":
        return L, risks[0] - lhats[0]
    if functional == "corr_risk":
        return risks[0], risks[1]
    raise ValueError(f"unknown functional {functional!r}")


def mc_functional(
    rule: LearningRule,
    dist: FiniteDistribution,
    n: int,
    k: int,
    functional: str,
    trials: int,
    seed: int,
    threads: int | None = None,
) -> EstimateWithError:
    """Monte Carlo estimate of a functional with standard error.

    Covariance-type functionals (fold_cov, corr_hold, corr_risk) use the
    unbiased sample covariance with the asymptotic standard error of the
    centered products; corr_hold and corr_risk carry their decomposition
    prefactors (2 and (k-1)/k).
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if functional in ("fold_cov", "corr_risk") and k < 2:
        raise ValueError("pair functionals require k >= 2")

    threads = thread_count() if threads is None else max(1, threads)
    risk_cache: dict = {}

    def run_range(lo: int, hi: int) -> _Moments:
        mom = _Moments()
        local_cache = dict(risk_cache)
        for t in range(lo, hi):
            x, y = _trial_values(
                rule, dist, n, k, functional, local_cache, trial_rng(seed, t)
            )
            mom.add(x, y)
        return mom

    if threads == 1:
        total = run_range(0, trials)
    else:
        chunk = max(1, (trials + threads - 1) // threads)
        bounds = [
            (lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)
        ]
        total = _Moments()
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for mom in ex.map(lambda b: run_range(*b), bounds):
                total.merge(mom)

    if functional in ("mse", "sls", "per_fold_noise", "mean"):
        value, se = total.mean_estimate()
    elif functional == "loss_var":
        value, se = total.var_estimate()
    else:
        value, se = total.cov_estimate()
        if functional == "corr_hold":
            value, se = 2 * value, 2 * se
        elif functional == "corr_risk":
            f = (k - 1) / k
            value, se = f * value, f * se
    return EstimateWithError(
        value=value, std_error=se, trials=trials, master_seed=seed
    )
