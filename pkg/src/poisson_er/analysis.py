"""Theoretical targets and goodness-of-fit machinery.

Closed forms: the fluid curve ``1 - exp(-c t) - t``, its first positive root
``beta(c)``, the dual parameter ``c* = c (1 - beta)``, the giant-component
standard deviations and the connectivity limit ``exp(-exp(-c))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from poisson_er.errors import DomainError, ParameterError

DEFAULT_SIGNIFICANCE = 1e-3
_BISECTION_WIDTH = 1e-6
# Below this excess over 1 the root is taken from its expansion in (c - 1).
_NEAR_CRITICAL = 1e-9


def fluid_curve(c: float, t):
    """``1 - exp(-c t) - t``, using expm1 so small ``c t`` keeps full precision."""
    if np.ndim(t) == 0:
        return -math.expm1(-c * t) - t
    t = np.asarray(t, dtype=np.float64)
    return -np.expm1(-c * t) - t


@dataclass(frozen=True)
class BetaSolution:
    c: float
    beta: float
    residual: float
    iterations: int


def beta_solver(c: float, tol: float = 1e-12) -> BetaSolution:
    """First positive root of ``1 - exp(-c t) - t``; 0 when ``c <= 1``.

    Bisection on ``[tol, 1]`` narrows the bracket to width 1e-6, then Newton
    polishes from the bracket midpoint until the residual is below ``tol``.
    """
    if not (c > 0 and math.isfinite(c)):
        raise ParameterError(f"c must be positive and finite, got {c!r}")
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if c <= 1.0:
        return BetaSolution(c=c, beta=0.0, residual=0.0, iterations=0)
    if c - 1.0 <= _NEAR_CRITICAL:
        beta = 2.0 * (c - 1.0) / (c * c)
        return BetaSolution(c=c, beta=beta, residual=abs(fluid_curve(c, beta)), iterations=0)

    lo, hi = min(tol, 1e-3 * (c - 1.0)), 1.0
    iterations = 0
    while hi - lo > _BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if fluid_curve(c, mid) > 0:
            lo = mid
        else:
            hi = mid
        iterations += 1

    t = 0.5 * (lo + hi)
    for _ in range(100):
        f = fluid_curve(c, t)
        if abs(f) <= tol:
            break
        slope = c * math.exp(-c * t) - 1.0
        step = f / slope
        t_new = t - step
        if not lo <= t_new <= hi:
            t_new = 0.5 * (lo + hi)
        if fluid_curve(c, t_new) > 0:
            lo = max(lo, t_new)
        else:
            hi = min(hi, t_new)
        t = t_new
        iterations += 1
    # For c above ~37 the root 1 - e^{-c} rounds to 1.0; it lies strictly below.
    t = min(t, math.nextafter(1.0, 0.0))
    return BetaSolution(c=c, beta=t, residual=abs(fluid_curve(c, t)), iterations=iterations)


def connectivity_limit(c: float) -> float:
    """Limit probability ``exp(-exp(-c))`` that G(n, (log n + c)/n) is connected."""
    return math.exp(-math.exp(-c))


@dataclass(frozen=True)
class TheoryTargets:
    c: float
    beta: float
    c_star: float
    giant_sd_poissonized: float
    giant_sd_fixed: float
    kc_success: float
    connect_limit: Callable[[float], float] = field(default=connectivity_limit, repr=False, compare=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("connect_limit")
        return d


def theory_targets(c: float) -> TheoryTargets:
    """Giant-component targets at ``c > 1``.

    The standard deviations are per unit sqrt(n): ``sqrt(beta)/(1 - c*)`` for
    the Poissonized core and ``sqrt(beta (1 - beta))/(1 - c*)`` for G(n, c/n).
    """
    if not c > 1:
        raise DomainError(f"giant-component targets need c > 1, got {c!r}")
    beta = beta_solver(c).beta
    c_star = c * (1.0 - beta)
    return TheoryTargets(
        c=c,
        beta=beta,
        c_star=c_star,
        giant_sd_poissonized=math.sqrt(beta) / (1.0 - c_star),
        giant_sd_fixed=math.sqrt(beta * (1.0 - beta)) / (1.0 - c_star),
        kc_success=beta,
    )


@dataclass(frozen=True)
class GofReport:
    statistic: float
    threshold: float
    passed: bool
    sample_size: int

    def as_dict(self) -> dict:
        return asdict(self)


def _report(statistic: float, threshold: float, size: int) -> GofReport:
    return GofReport(float(statistic), float(threshold), bool(statistic <= threshold), int(size))


def ks_threshold(n_eff: float, significance: float = DEFAULT_SIGNIFICANCE) -> float:
    """Asymptotic Kolmogorov critical distance ``K_{1-a} / sqrt(n_eff)``."""
    return float(stats.kstwobign.isf(significance)) / math.sqrt(n_eff)


def ks_distance(
    sample: Sequence[float],
    cdf: Callable[[np.ndarray], np.ndarray],
    significance: float = DEFAULT_SIGNIFICANCE,
) -> GofReport:
    """Kolmogorov-Smirnov distance between a sorted sample and a CDF."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise ParameterError("sample must be non-empty")
    if np.any(np.diff(x) < 0):
        raise ParameterError("sample must be sorted")
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    # Ties: the empirical CDF at a repeated value is the last rank.
    _, first = np.unique(x, return_index=True)
    last = np.concatenate((first[1:], [n])) - 1
    d_plus = np.max(upper[last] - f[first])
    d_minus = np.max(f[first] - lower[first])
    return _report(max(d_plus, d_minus), ks_threshold(n, significance), n)


def ks_two_sample(a, b, significance: float = DEFAULT_SIGNIFICANCE) -> GofReport:
    """Two-sample KS distance with the asymptotic threshold at ``n m / (n + m)``."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ParameterError("samples must be non-empty")
    grid = np.concatenate((a, b))
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    n_eff = a.size * b.size / (a.size + b.size)
    return _report(np.max(np.abs(fa - fb)), ks_threshold(n_eff, significance), a.size + b.size)


def _pool_bins(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    """Merge adjacent bins left to right until each expected count reaches the floor."""
    obs_out, exp_out = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed.tolist(), expected.tolist()):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_out:
            obs_out[-1] += acc_o
            exp_out[-1] += acc_e
        else:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
    return np.asarray(obs_out), np.asarray(exp_out)


def chi_square_gof(
    observed,
    expected,
    ddof: int = 0,
    significance: float = DEFAULT_SIGNIFICANCE,
    min_expected: float = 5.0,
) -> GofReport:
    """Pearson chi-square of counts against expected counts in ordered bins.

    Adjacent bins are pooled so every expected count is at least
    ``min_expected``. With no degrees of freedom left the threshold is 0.
    """
    obs, exp = _pool_bins(np.asarray(observed, float), np.asarray(expected, float), min_expected)
    size = int(round(obs.sum()))
    df = obs.size - 1 - ddof
    statistic = float(np.sum((obs - exp) ** 2 / np.where(exp > 0, exp, 1.0)))
    if df < 1:
        return _report(0.0 if statistic < 1e-9 else statistic, 0.0, size)
    return _report(statistic, float(stats.chi2.isf(significance, df)), size)


def chi_square_homogeneity(
    counts_a,
    counts_b,
    significance: float = DEFAULT_SIGNIFICANCE,
    min_expected: float = 5.0,
) -> GofReport:
    """Chi-square test that two histograms over the same categories share a law.

    Categories are sorted by pooled frequency and the rarest are merged into
    one bin until every expected cell count is at least ``min_expected``.
    """
    a = np.asarray(counts_a, dtype=np.float64)
    b = np.asarray(counts_b, dtype=np.float64)
    na, nb = a.sum(), b.sum()
    total = a + b
    order = np.argsort(-total, kind="stable")
    a, b, total = a[order], b[order], total[order]
    floor = min_expected * (na + nb) / min(na, nb)
    ok = total >= floor
    if not ok.all():
        a = np.append(a[ok], a[~ok].sum())
        b = np.append(b[ok], b[~ok].sum())
        if a[-1] + b[-1] < floor and a.size > 1:
            a[-2] += a[-1]
            b[-2] += b[-1]
            a, b = a[:-1], b[:-1]
    total = a + b
    keep = total > 0
    a, b, total = a[keep], b[keep], total[keep]
    ea = total * na / (na + nb)
    eb = total * nb / (na + nb)
    statistic = float(np.sum((a - ea) ** 2 / ea) + np.sum((b - eb) ** 2 / eb))
    df = a.size - 1
    if df < 1:
        return _report(statistic, 0.0, int(na + nb))
    return _report(statistic, float(stats.chi2.isf(significance, df)), int(na + nb))


def geometric_fit(counts, significance: float = DEFAULT_SIGNIFICANCE) -> tuple[float, GofReport]:
    """MLE of a geometric law on {0, 1, 2, ...} plus a chi-square GOF report.

    The success probability is ``1/(1 + mean)``; the last bin collects the
    upper tail so all expected counts reach 5.
    """
    x = np.asarray(counts, dtype=np.int64)
    if x.size == 0:
        raise ParameterError("counts must be non-empty")
    if np.any(x < 0):
        raise ParameterError("counts must be non-negative")
    success = 1.0 / (1.0 + float(x.mean()))
    n = x.size
    top = int(x.max())
    ks = np.arange(top + 1)
    pmf = success * (1.0 - success) ** ks
    expected = n * pmf
    expected[-1] = n * (1.0 - success) ** top  # P(X >= top)
    observed = np.bincount(x, minlength=top + 1)
    return success, chi_square_gof(observed, expected, ddof=1, significance=significance)


def exact_connectivity_probability(n: int, p: float) -> float:
    """P(G(n, p) is connected) by enumerating all edge subsets (small n only)."""
    if n > 7:
        raise ParameterError("enumeration is limited to n <= 7")
    if n <= 1:
        return 1.0
    pairs = list(itertools.combinations(range(n), 2))
    total = 0.0
    for mask in range(1 << len(pairs)):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        k = 0
        for bit, (a, b) in enumerate(pairs):
            if mask >> bit & 1:
                k += 1
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        if len({find(v) for v in range(n)}) == 1:
            total += p**k * (1.0 - p) ** (len(pairs) - k)
    return total


def summarize(values) -> dict:
    """Mean, sample sd, and quartiles of a 1-d sample."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return {"count": 0}
    q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "count": int(x.size),
        "mean": float(x.mean()),
        "sd": float(x.std(ddof=1)) if x.size > 1 else 0.0,
        "min": float(q[0]),
        "q25": float(q[1]),
        "median": float(q[2]),
        "q75": float(q[3]),
        "max": float(q[4]),
    }
