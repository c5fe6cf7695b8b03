"""Brute-force fold covariance over all 2^n labelings.

Oracle path for label-counting rules under Ber(1/2) labels: the hold-out
losses depend on a labeling only through per-fold one-counts, so the whole
expectation is an integer sum over every labeling, evaluated with numpy and
returned as an exact rational.  Independent of every closed-form formula it
is used to check.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

MAX_BRUTE_N = 26


def fold_cov_bruteforce(n: int, m: int, trains_to_one) -> Fraction:
    """Exact Cov(Lhat_1, Lhat_2) under uniform labels for a counting rule.

    ``trains_to_one(train_ones)`` maps the one-count of a training set of
    size n - m to the constant hypothesis label the rule outputs (0 or 1).
    """
    if n % m != 0 or not 1 <= m <= n // 2:
        raise ValueError("need m | n and 1 <= m <= n/2")
    if n > MAX_BRUTE_N:
        raise ValueError(f"brute force capped at n = {MAX_BRUTE_N}")
    table = np.array(
        [int(trains_to_one(t)) for t in range(n - m + 1)], dtype=np.int64
    )

    labelings = np.arange(1 << n, dtype=np.uint32)
    total_ones = np.bitwise_count(labelings).astype(np.int64)

    def fold_loss_times_m(i: int) -> np.ndarray:
        mask = np.uint32(((1 << m) - 1) << (i * m))
        cnt = np.bitwise_count(labelings & mask).astype(np.int64)
        h = table[total_ones - cnt]
        return np.where(h == 1, m - cnt, cnt)

    l1 = fold_loss_times_m(0)
    l2 = fold_loss_times_m(1)
    T = 1 << n
    s12 = int(np.sum(l1 * l2, dtype=np.int64))
    s1 = int(np.sum(l1, dtype=np.int64))
    s2 = int(np.sum(l2, dtype=np.int64))
    return Fraction(T * s12 - s1 * s2, T * T * m * m)
