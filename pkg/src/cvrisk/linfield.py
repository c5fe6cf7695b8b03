"""Prime-field linear algebra and the randomized linear ERM.

Gaussian binomial coefficients, exact matrix-rank distributions, uniform
sampling from solution cosets, and the closed-form loss laws of the uniform
consistent-linear-function learner, plus a seeded Monte Carlo estimator of
its CV mean-squared error.

The ground truth is fixed to the zero functional; rank statistics and loss
laws are invariant under this choice because the feature law is uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .decomposition import BoundCheck
from .types import (
    EstimateWithError,
    FiniteDistribution,
    Hypothesis,
    HypothesisMixture,
    Inconsistent,
    InvalidFoldSize,
    LabeledPoint,
    LearningRule,
    OutOfRange,
    partition_folds,
)

_ZERO = Fraction(0)

# fixed Monte Carlo chunk: part of the (seed, trial) -> randomness map,
# so it must never depend on runtime configuration
_MC_CHUNK = 1 << 14


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    i = 2
    while i * i <= q:
        if q % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Prime modulus; primality is checked by trial division."""

    q: int

    def __post_init__(self) -> None:
        if not _is_prime(self.q):
            raise ValueError(f"q = {self.q} is not prime")


@dataclass(frozen=True)
class FqMatrix:
    """Dense matrix over Z_q with entries reduced into [0, q)."""

    rows: tuple[tuple[int, ...], ...]
    q: int

    def __post_init__(self) -> None:
        FieldSpec(self.q)
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("ragged rows")
        if any(not 0 <= e < self.q for r in self.rows for e in r):
            raise ValueError("entries must lie in [0, q)")

    @property
    def n1(self) -> int:
        return len(self.rows)

    @property
    def n2(self) -> int:
        return len(self.rows[0]) if self.rows else 0


def gaussian_coefficient(n: int, k: int, q: int) -> int:
    """q-binomial coefficient: number of k-dim subspaces of F_q^n."""
    if not 0 <= k <= n:
        raise OutOfRange(f"need 0 <= k <= n, got n={n}, k={k}")
    value = Fraction(1)
    for i in range(k):
        value *= Fraction(q ** (n - i) - 1, q ** (k - i) - 1)
    assert value.denominator == 1
    return value.numerator


def rank_prob(n1: int, n2: int, r: int, q: int, formula: str = "product") -> Fraction:
    """Probability that a uniform n1 x n2 matrix over F_q has rank r.

    Two independent evaluation routes: an alternating sum over Gaussian
    coefficients and the telescoped product form.  They must agree exactly.
    """
    if not 0 <= r <= min(n1, n2):
        raise OutOfRange(f"need 0 <= r <= min(n1, n2), got r={r}")
    if formula == "sum":
        total = _ZERO
        for l in range(r + 1):
            term = Fraction(
                gaussian_coefficient(r, l, q), q ** (n1 * (n2 - l))
            ) * (q ** math.comb(r - l, 2))
            total += term if (r - l) % 2 == 0 else -term
        return gaussian_coefficient(n2, r, q) * total
    if formula == "product":
        value = Fraction(gaussian_coefficient(n2, r, q), q ** (n1 * (n2 - r)))
        for s in range(r):
            value *= 1 - Fraction(1, q ** (n1 - s))
        return value
    raise ValueError(f"unknown formula {formula!r}")


@dataclass(frozen=True)
class RankDistribution:
    """Exact rank law of a uniform n1 x n2 matrix over F_q."""

    q: int
    n1: int
    n2: int
    probs: tuple[Fraction, ...]  # index r = 0 .. min(n1, n2)

    def __post_init__(self) -> None:
        if sum(self.probs) != 1:
            raise ValueError("rank probabilities must sum exactly to 1")
        if any(not 0 <= p <= 1 for p in self.probs):
            raise ValueError("rank probabilities must lie in [0, 1]")


def rank_distribution(n1: int, n2: int, q: int) -> RankDistribution:
    probs = tuple(
        rank_prob(n1, n2, r, q, "product") for r in range(min(n1, n2) + 1)
    )
    return RankDistribution(q=q, n1=n1, n2=n2, probs=probs)


def rank_asymptotics_check(
    n1: int, n2: int, j: int, q: int, constant: int = 4
) -> BoundCheck:
    """Exact rank probabilities against the stated decay envelopes.

    j = 0 checks the full-rank complement 1 - R(m0) <= constant * q^-(D0+1);
    j >= 1 checks R(m0 - j) <= constant * q^-(j (D0+j)).  The envelope
    constant makes the big-O claims testable; 4 is calibrated against exact
    values at q = 2.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    m0 = min(n1, n2)
    d0 = abs(n1 - n2)
    if j == 0:
        lhs = 1 - rank_prob(n1, n2, m0, q)
        rhs = Fraction(constant, q ** (d0 + 1))
        name = f"full-rank-complement(n1={n1},n2={n2},q={q})"
    else:
        if m0 - j < 0:
            lhs = _ZERO
        else:
            lhs = rank_prob(n1, n2, m0 - j, q)
        rhs = Fraction(constant, q ** (j * (d0 + j)))
        name = f"rank-deficiency-{j}(n1={n1},n2={n2},q={q})"
    holds = lhs <= rhs
    return BoundCheck(
        name=name, lhs=float(lhs), rhs=float(rhs), holds=holds,
        slack=float(rhs - lhs),
    )


@dataclass(frozen=True)
class LinearHypothesis:
    """f_a(x) = <a, x> mod q."""

    coeffs: tuple[int, ...]
    q: int

    def predict(self, x) -> int:
        return sum(a * xi for a, xi in zip(self.coeffs, x)) % self.q

    def risk_vs(self, truth: "LinearHypothesis") -> Fraction:
        """0-1 risk under the realizable uniform-feature distribution:
        0 against itself, 1 - 1/q against any other linear functional."""
        return _ZERO if self.coeffs == truth.coeffs else 1 - Fraction(1, self.q)

    def as_hypothesis(self) -> Hypothesis:
        return Hypothesis(
            name=f"lin{self.coeffs}q{self.q}", predict=self.predict
        )


def uniform_linear_dist(coeffs: tuple[int, ...], q: int) -> FiniteDistribution:
    """Explicit support of (X, f(X)) with X uniform over F_q^d (small q^d only)."""
    d = len(coeffs)
    if q ** d > 1 << 16:
        raise ValueError("explicit support capped at q^d <= 2^16")
    truth = LinearHypothesis(coeffs=tuple(coeffs), q=q)
    pts = []
    mass = Fraction(1, q ** d)

    def vectors(prefix, depth):
        if depth == d:
            x = tuple(prefix)
            pts.append((LabeledPoint(x, truth.predict(x)), mass))
            return
        for e in range(q):
            vectors(prefix + [e], depth + 1)

    vectors([], 0)
    return FiniteDistribution.from_pairs(pts)


# ---------------------------------------------------------------------------
# scalar Gaussian elimination and coset sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionCoset:
    """All solutions of X b = y: particular + span(basis), q^(d - r) points."""

    particular: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    q: int

    @property
    def size(self) -> int:
        return self.q ** len(self.basis)

    def elements(self):
        """Enumerate the coset (small cosets only; used by uniformity tests)."""
        d = len(self.particular)
        free = len(self.basis)
        for idx in range(self.size):
            coeffs = []
            v = idx
            for _ in range(free):
                coeffs.append(v % self.q)
                v //= self.q
            yield tuple(
                (self.particular[i] + sum(c * b[i] for c, b in zip(coeffs, self.basis)))
                % self.q
                for i in range(d)
            )

    def sample(self, rng) -> tuple[int, ...]:
        coeffs = rng.integers(0, self.q, size=len(self.basis))
        d = len(self.particular)
        return tuple(
            (self.particular[i] + sum(int(c) * b[i] for c, b in zip(coeffs, self.basis)))
            % self.q
            for i in range(d)
        )


def _rref_augmented(rows: list[list[int]], q: int):
    """In-place RREF of an augmented system; returns pivot column list."""
    n = len(rows)
    width = len(rows[0]) if rows else 0
    inv = [0] + [pow(a, -1, q) for a in range(1, q)]
    pivots = []
    rank = 0
    for col in range(width - 1):  # last column is the rhs
        sel = None
        for i in range(rank, n):
            if rows[i][col] % q != 0:
                sel = i
                break
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        factor = inv[rows[rank][col] % q]
        rows[rank] = [(e * factor) % q for e in rows[rank]]
        for i in range(n):
            if i != rank and rows[i][col] % q != 0:
                f = rows[i][col] % q
                rows[i] = [
                    (a - f * b) % q for a, b in zip(rows[i], rows[rank])
                ]
        pivots.append(col)
        rank += 1
    return pivots


def solve_uniform(X: FqMatrix, y, seed: int):
    """Solve X b = y over Z_q and draw one solution uniformly.

    Gaussian elimination yields a particular solution (free variables zero)
    and a nullspace basis; the draw puts i.i.d. uniform coefficients on the
    basis.  Raises Inconsistent when the system has no solution.
    """
    q = X.q
    d = X.n2
    y = [int(v) % q for v in y]
    if len(y) != X.n1:
        raise ValueError("rhs length must match the number of rows")
    rows = [list(r) + [yv] for r, yv in zip(X.rows, y)]
    pivots = _rref_augmented(rows, q)
    rank = len(pivots)
    for i in range(rank, X.n1):
        if rows[i][d] % q != 0:
            raise Inconsistent("linear system has no solution")
    particular = [0] * d
    for i, col in enumerate(pivots):
        particular[col] = rows[i][d] % q
    pivot_set = set(pivots)
    basis = []
    for free_col in range(d):
        if free_col in pivot_set:
            continue
        vec = [0] * d
        vec[free_col] = 1
        for i, col in enumerate(pivots):
            vec[col] = (-rows[i][free_col]) % q
        basis.append(tuple(vec))
    coset = SolutionCoset(particular=tuple(particular), basis=tuple(basis), q=q)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0))))
    draw = coset.sample(rng)
    return coset, LinearHypothesis(coeffs=draw, q=q)


def _rank_of_rows(rows, q: int) -> int:
    work = [list(r) + [0] for r in rows]
    if not work:
        return 0
    return len(_rref_augmented(work, q))


# ---------------------------------------------------------------------------
# the randomized linear learner
# ---------------------------------------------------------------------------


def _wrong_surrogate(d: int, q: int) -> Hypothesis:
    """Stands for a uniformly drawn consistent linear function != truth.

    Only its population risk is defined (exactly 1 - 1/q against the ground
    truth); it has no pointwise predictor.
    """
    return Hypothesis(
        name=f"linwrong(q={q},d={d})",
        predict=None,
        closed_form_risk=lambda _dist, _q=q: 1 - Fraction(1, _q),
    )


def linear_rule(d: int, q: int, mode: str = "mixture", seed: int = 0) -> LearningRule:
    """Uniform consistent-linear-function ERM over F_q^d, ground truth 0.

    mode="mixture": training on a rank-r sample returns the exact two-atom
    conditional mixture (truth with probability q^(r-d), otherwise the
    wrong-linear surrogate of risk 1 - 1/q).

    mode="sample": training returns one concrete coset draw, derived
    deterministically from (seed, canonicalized sample) so the rule stays
    symmetric.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    FieldSpec(q)
    truth = LinearHypothesis(coeffs=(0,) * d, q=q).as_hypothesis()
    wrong = _wrong_surrogate(d, q)

    def features_of(pts):
        feats = []
        for pt in pts:
            if pt.y % q != 0:
                raise Inconsistent(
                    "linear_rule is defined in the realizable setting with ground truth 0"
                )
            feats.append(tuple(int(v) % q for v in pt.x))
        return feats

    if mode == "mixture":

        def train(pts):
            feats = features_of(pts)
            r = _rank_of_rows(feats, q)
            p_truth = Fraction(1, q ** (d - r))
            if p_truth == 1:
                return HypothesisMixture.point(truth)
            return HypothesisMixture(((truth, p_truth), (wrong, 1 - p_truth)))

        return LearningRule(name=f"linear(d={d},q={q})", train=train)

    if mode == "sample":

        def train_sampled(pts):
            feats = features_of(pts)
            canon = tuple(sorted(feats)) or ((0,) * d,)
            mix_seed = hash((seed, canon)) & 0x7FFFFFFFFFFFFFFF
            _, h = solve_uniform(
                FqMatrix(rows=canon, q=q), [0] * len(canon), mix_seed
            )
            return HypothesisMixture.point(h.as_hypothesis())

        return LearningRule(name=f"linear-sampled(d={d},q={q})", train=train_sampled)

    raise ValueError("mode must be 'mixture' or 'sample'")


# ---------------------------------------------------------------------------
# closed-form loss laws
# ---------------------------------------------------------------------------


def expected_loss_exact(n_train: int, d: int, q: int):
    """(expected loss, S0, loss variance) of the linear learner at one size.

    L_bar = (1 - 1/q) S0 with S0 = sum_r (1 - q^(r-d)) R_q(n_train, d, r);
    the variance is (1 - 1/q)^2 S0 (1 - S0) since the realized risk is a
    scaled Bernoulli.
    """
    if n_train < 0:
        raise ValueError("n_train must be >= 0")
    s0 = _ZERO
    for r in range(min(n_train, d) + 1):
        s0 += (1 - Fraction(1, q ** (d - r))) * rank_prob(n_train, d, r, q)
    one = 1 - Fraction(1, q)
    return one * s0, s0, one * one * s0 * (1 - s0)


def fold_noise_exact(n_train: int, d: int, q: int, m: int) -> Fraction:
    """Expected conditional fold variance (1/m) sum_r R_q L_r (1 - L_r)
    with L_r = (1 - q^(r-d)) (1 - 1/q)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    one = 1 - Fraction(1, q)
    total = _ZERO
    for r in range(min(n_train, d) + 1):
        lr = (1 - Fraction(1, q ** (d - r))) * one
        total += rank_prob(n_train, d, r, q) * lr * (1 - lr)
    return total / m


def fold_noise_envelope_check(
    n_train: int, d: int, q: int, m: int, constant: int = 4
) -> BoundCheck:
    """Decay envelope constant/(m q^(|n-d| + 2 [n>=d])) for the fold noise."""
    value = fold_noise_exact(n_train, d, q, m)
    expo = abs(n_train - d) + (2 if n_train >= d else 0)
    rhs = Fraction(constant, m * q ** expo)
    return BoundCheck(
        name=f"fold-noise-envelope(n={n_train},d={d},q={q},m={m})",
        lhs=float(value),
        rhs=float(rhs),
        holds=value <= rhs,
        slack=float(rhs - value),
    )


def linear_mse_bound(n: int, m: int, d: int, q: int):
    """Case classification of the CV MSE and its leading-order value.

    Case 1 (n < d): q^-(d-n);  Case 2 (n >= d > n-m): 1;
    Case 3 (n-m >= d): q^-(n-m-d+1).
    """
    if n % m != 0:
        raise InvalidFoldSize(f"m={m} must divide n={n}")
    if n < d:
        return 1, Fraction(1, q ** (d - n))
    if n - m < d:
        return 2, Fraction(1)
    return 3, Fraction(1, q ** (n - m - d + 1))


# ---------------------------------------------------------------------------
# batched elimination over F_q (numpy, trial axis first)
# ---------------------------------------------------------------------------


def batched_rref(Xs: np.ndarray, q: int):
    """Reduced row echelon form of a (T, n, d) stack of matrices over F_q.

    Returns (R, rank, pivot_cols) where pivot_cols[t, j] is the pivot column
    of row j for j < rank[t].
    """
    A = (np.asarray(Xs, dtype=np.int64) % q).copy()
    T, n, d = A.shape
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv[a] = pow(a, -1, q)
    rank = np.zeros(T, dtype=np.int64)
    pivot_cols = np.full((T, n), -1, dtype=np.int64)
    rows_idx = np.arange(n)
    for col in range(d):
        colvals = A[:, :, col]
        candidate = (colvals != 0) & (rows_idx[None, :] >= rank[:, None])
        has = candidate.any(axis=1)
        if not has.any():
            continue
        act = np.nonzero(has)[0]
        r = rank[act]
        s = np.argmax(candidate[act], axis=1)
        sub = A[act]
        ar = np.arange(len(act))
        # swap rows r and s, normalize the pivot row, eliminate elsewhere
        tmp = sub[ar, s, :].copy()
        sub[ar, s, :] = sub[ar, r, :]
        sub[ar, r, :] = tmp
        piv = sub[ar, r, col]
        sub[ar, r, :] = (sub[ar, r, :] * inv[piv][:, None]) % q
        factors = sub[:, :, col].copy()
        factors[ar, r] = 0
        sub = (sub - factors[:, :, None] * sub[ar, r, :][:, None, :]) % q
        A[act] = sub
        pivot_cols[act, r] = col
        rank[act] += 1
    return A, rank, pivot_cols


def batched_rank(Xs: np.ndarray, q: int) -> np.ndarray:
    return batched_rref(Xs, q)[1]


def batched_nullspace_sample(R, rank, pivot_cols, q: int, C) -> np.ndarray:
    """Uniform nullspace elements from free coordinates C (T, d).

    Coordinates of C at pivot positions are discarded; the remaining free
    coordinates parameterize the nullspace bijectively.
    """
    T, n, d = R.shape
    valid = np.arange(n)[None, :] < rank[:, None]
    tt, jj = np.nonzero(valid)
    pc = pivot_cols[tt, jj]
    pivot_mask = np.zeros((T, d), dtype=bool)
    pivot_mask[tt, pc] = True
    c = np.where(pivot_mask, 0, np.asarray(C, dtype=np.int64) % q)
    dots = np.einsum("tnd,td->tn", R, c) % q
    v = c.copy()
    v[tt, pc] = (-dots[tt, jj]) % q
    return v


def empirical_rank_counts(
    n1: int, n2: int, q: int, trials: int, seed: int
) -> np.ndarray:
    """Rank histogram of seeded uniform matrices (chunked, schedule-free)."""
    m0 = min(n1, n2)
    counts = np.zeros(m0 + 1, dtype=np.int64)
    done = 0
    chunk_idx = 0
    while done < trials:
        take = min(_MC_CHUNK, trials - done)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((seed, chunk_idx)))
        )
        Xs = rng.integers(0, q, size=(_MC_CHUNK, n1, n2), dtype=np.int8)[:take]
        counts += np.bincount(batched_rank(Xs, q), minlength=m0 + 1)
        done += take
        chunk_idx += 1
    return counts


# ---------------------------------------------------------------------------
# Monte Carlo CV MSE of the linear learner
# ---------------------------------------------------------------------------


def linear_mse_mc_detail(
    n: int, k: int, d: int, q: int, trials: int, seed: int
) -> dict:
    """Monte Carlo CV statistics for the linear learner.

    Per trial: draw the feature matrix, train each fold model and the full
    model by an actual uniform coset draw, count actual hold-out
    misclassifications, and use the closed-form risks (0 or 1 - 1/q) for the
    population terms.  All per-trial values are rationals with denominator
    k m q, accumulated as exact integers, so the result is bit-reproducible
    and independent of chunking internals.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    scheme = partition_folds(n, k)
    m = scheme.m
    FieldSpec(q)
    denom = k * m * q
    sum_a = sum_a2 = sum_a3 = sum_a4 = 0
    sum_hits = sum_hits2 = 0
    sum_wrong = 0

    done = 0
    chunk_idx = 0
    keep_rows = [
        np.array([j for j in range(n) if j not in set(block)], dtype=np.int64)
        for block in scheme.blocks
    ]
    block_rows = [np.array(block, dtype=np.int64) for block in scheme.blocks]
    while done < trials:
        take = min(_MC_CHUNK, trials - done)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((seed, chunk_idx)))
        )
        X = rng.integers(0, q, size=(_MC_CHUNK, n, d), dtype=np.int8).astype(np.int64)[:take]
        C = rng.integers(0, q, size=(_MC_CHUNK, k + 1, d), dtype=np.int8).astype(np.int64)[:take]

        hits_total = np.zeros(take, dtype=np.int64)
        for i in range(k):
            R, rank, pivots = batched_rref(X[:, keep_rows[i], :], q)
            v = batched_nullspace_sample(R, rank, pivots, q, C[:, i, :])
            dots = np.einsum("tmd,td->tm", X[:, block_rows[i], :], v) % q
            hits_total += (dots != 0).sum(axis=1)
        R0, rank0, piv0 = batched_rref(X, q)
        v0 = batched_nullspace_sample(R0, rank0, piv0, q, C[:, k, :])
        wrong0 = (v0 != 0).any(axis=1).astype(np.int64)

        # a/denom = Lhat_cv - L exactly
        a = q * hits_total - wrong0 * (q - 1) * k * m
        a2 = a * a
        sum_a += int(a.sum())
        sum_a2 += int(a2.sum())
        sum_a3 += int((a2 * a).sum())
        sum_a4 += int((a2 * a2).sum())
        sum_hits += int(hits_total.sum())
        sum_hits2 += int((hits_total * hits_total).sum())
        sum_wrong += int(wrong0.sum())
        done += take
        chunk_idx += 1

    T = trials

    def mean_se(s1: Fraction, s2: Fraction) -> tuple[float, float]:
        var = (s2 - s1 * s1 / T) / (T - 1)
        return float(s1 / T), math.sqrt(float(var) / T) if var > 0 else 0.0

    D = Fraction(1, denom)
    mse_v, mse_se = mean_se(sum_a2 * D * D, sum_a4 * D ** 4)
    cv_v, cv_se = mean_se(sum_hits * Fraction(1, k * m), sum_hits2 * Fraction(1, (k * m) ** 2))
    w = Fraction(q - 1, q)
    risk_v, risk_se = mean_se(sum_wrong * w, sum_wrong * w * w)

    def est(v, se):
        return EstimateWithError(value=v, std_error=se, trials=trials, master_seed=seed)

    return {
        "mse": est(mse_v, mse_se),
        "mean_cv": est(cv_v, cv_se),
        "mean_risk": est(risk_v, risk_se),
    }


def linear_mse_mc(
    n: int, k: int, d: int, q: int, trials: int, seed: int
) -> EstimateWithError:
    """CV mean-squared-error estimate for the linear learner (seeded)."""
    return linear_mse_mc_detail(n, k, d, q, trials, seed)["mse"]


def linear_mse_exact_d1(n: int, k: int, q: int) -> Fraction:
    """Exact CV MSE of the d=1 linear learner by zero-pattern enumeration.

    With one feature dimension everything is determined by which features
    are zero: a training set containing any nonzero feature forces the truth,
    otherwise the draw is uniform over F_q; a wrong functional misclassifies
    exactly the nonzero-feature hold-out points.  This is an independent
    oracle for the Monte Carlo path.
    """
    scheme = partition_folds(n, k)
    m = scheme.m
    FieldSpec(q)
    p_nz = Fraction(q - 1, q)
    one = 1 - Fraction(1, q)
    total = _ZERO
    for pattern in range(1 << n):
        z = [(pattern >> j) & 1 for j in range(n)]
        w = Fraction(1)
        for zj in z:
            w *= p_nz if zj else (1 - p_nz)
        ones = [sum(z[j] for j in block) for block in scheme.blocks]
        wrong_fold = []
        for i, block in enumerate(scheme.blocks):
            bs = set(block)
            train_nonzero = any(z[j] for j in range(n) if j not in bs)
            wrong_fold.append(_ZERO if train_nonzero else 1 - Fraction(1, q))
        wrong_full = _ZERO if any(z) else 1 - Fraction(1, q)

        e_lhat = sum(
            (wf * Fraction(o, m) for wf, o in zip(wrong_fold, ones)), _ZERO
        ) / k
        e_lhat_sq = _ZERO
        for i in range(k):
            for j in range(k):
                if i == j:
                    e_lhat_sq += wrong_fold[i] * Fraction(ones[i], m) ** 2
                else:
                    e_lhat_sq += (
                        wrong_fold[i] * wrong_fold[j]
                        * Fraction(ones[i] * ones[j], m * m)
                    )
        e_lhat_sq /= k * k
        e_l = wrong_full * one
        e_l2 = wrong_full * one * one
        total += w * (e_lhat_sq - 2 * e_lhat * e_l + e_l2)
    return total
