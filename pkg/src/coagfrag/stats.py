"""Two-sample test machinery for the verification harness.

The Kolmogorov-Smirnov statistic is computed exactly by a sorted merge of
the two samples (ties handled by evaluating both empirical CDFs at every
distinct data point); p-values use the asymptotic Kolmogorov distribution
at the effective sample size.  Block-count panels use a two-sample
chi-square homogeneity test with bins pooled until every expected count
is at least 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError

__all__ = ["KsResult", "ks_two_sample", "kolmogorov_sf", "ChisqResult",
           "chisq_two_sample", "bootstrap_se_neglog_mean"]


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(lam) =
    2 sum_k (-1)**(k-1) exp(-2 k**2 lam**2), with the theta-function dual
    used for small arguments where that series converges slowly."""
    if lam <= 0:
        return 1.0
    if lam < 0.4:
        # complement via the small-lambda expansion of the CDF
        t = math.pi / lam
        total = 0.0
        for k in range(1, 20):
            term = math.exp(-((2 * k - 1) ** 2) * t * t / 8.0)
            total += term
            if term < 1e-18 * total:
                break
        cdf = math.sqrt(2.0 * math.pi) / lam * total
        return min(max(1.0 - cdf, 0.0), 1.0)
    total = 0.0
    for k in range(1, 200):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-30):
            break
    return min(max(2.0 * total, 0.0), 1.0)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


def ks_two_sample(x, y) -> KsResult:
    """Exact two-sample KS statistic by sorted merge, asymptotic p-value."""
    xs = np.sort(np.asarray(x, dtype=float))
    ys = np.sort(np.asarray(y, dtype=float))
    n1, n2 = xs.size, ys.size
    if n1 == 0 or n2 == 0:
        raise DomainError("KS test needs nonempty samples")
    grid = np.concatenate((xs, ys))
    grid.sort(kind="mergesort")
    f1 = np.searchsorted(xs, grid, side="right") / n1
    f2 = np.searchsorted(ys, grid, side="right") / n2
    d = float(np.max(np.abs(f1 - f2)))
    en = n1 * n2 / (n1 + n2)
    return KsResult(d, kolmogorov_sf(math.sqrt(en) * d), n1, n2)


@dataclass(frozen=True)
class ChisqResult:
    statistic: float
    p_value: float
    dof: int
    n_cells: int


def _pool_bins(c1: np.ndarray, c2: np.ndarray, min_expected: float):
    """Merge adjacent bins until both expected counts reach the floor."""
    n1, n2 = c1.sum(), c2.sum()
    total = c1 + c2
    e1 = total * n1 / (n1 + n2)
    e2 = total * n2 / (n1 + n2)
    bins1, bins2 = [], []
    acc1 = acc2 = exp1 = exp2 = 0.0
    for a, b, ea, eb in zip(c1, c2, e1, e2):
        acc1 += a
        acc2 += b
        exp1 += ea
        exp2 += eb
        if exp1 >= min_expected and exp2 >= min_expected:
            bins1.append(acc1)
            bins2.append(acc2)
            acc1 = acc2 = exp1 = exp2 = 0.0
    if exp1 > 0 or exp2 > 0:
        if bins1:
            bins1[-1] += acc1
            bins2[-1] += acc2
        else:
            bins1.append(acc1)
            bins2.append(acc2)
    return np.asarray(bins1), np.asarray(bins2)


def chisq_two_sample(counts1, counts2, min_expected: float = 5.0) -> ChisqResult:
    """Two-sample homogeneity chi-square over matched categorical counts."""
    c1 = np.asarray(counts1, dtype=float)
    c2 = np.asarray(counts2, dtype=float)
    if c1.shape != c2.shape or c1.ndim != 1:
        raise DomainError("count vectors must be 1-d and aligned")
    c1, c2 = _pool_bins(c1, c2, min_expected)
    if c1.size < 2:
        raise DomainError("not enough occupied cells for a chi-square test")
    n1, n2 = c1.sum(), c2.sum()
    total = c1 + c2
    e1 = total * n1 / (n1 + n2)
    e2 = total * n2 / (n1 + n2)
    stat = float(np.sum((c1 - e1) ** 2 / e1) + np.sum((c2 - e2) ** 2 / e2))
    dof = c1.size - 1
    p = float(sp.gammaincc(dof / 2.0, stat / 2.0))
    return ChisqResult(stat, p, dof, int(c1.size))


def bootstrap_se_neglog_mean(values: np.ndarray, rng: np.random.Generator,
                             n_boot: int = 200) -> float:
    """Bootstrap standard error of -log(mean(values))."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        raise DomainError("bootstrap needs at least two values")
    idx = rng.integers(0, n, size=(n_boot, n))
    means = v[idx].mean(axis=1)
    return float(np.std(-np.log(means), ddof=1))
