"""One-way ANOVA and the F-distribution survival function.

The survival function is computed through the regularized incomplete beta
function, evaluated with the continued-fraction expansion (modified Lentz)
and the usual symmetry switch so the fraction always converges fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateData, InsufficientData, InvalidDf

__all__ = ["AnovaResult", "anova_one_way", "f_sf", "regularized_incomplete_beta"]

_LENTZ_TINY = 1e-300
_LENTZ_EPS = 1e-14
_LENTZ_MAX_ITER = 500


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, valid for x < (a+1)/(a+b+2)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_TINY:
        d = _LENTZ_TINY
    d = 1.0 / d
    result = d
    for m in range(1, _LENTZ_MAX_ITER + 1):
        m2 = 2 * m
        num = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + num * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + num / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        result *= d * c
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + num * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + num / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        result *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            return result
    raise ArithmeticError(f"incomplete beta fraction did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def f_sf(f_value: float, df1: float, df2: float) -> float:
    """P(F > f_value) for an F distribution with (df1, df2) degrees of freedom.

    Uses p = I_x(df2/2, df1/2) with x = df2 / (df2 + df1 * f_value).
    """
    if df1 < 1 or df2 < 1:
        raise InvalidDf(f"degrees of freedom ({df1}, {df2}) must each be >= 1")
    if f_value < 0:
        raise ValueError("F statistic must be non-negative")
    if math.isinf(f_value):
        return 0.0
    x = df2 / (df2 + df1 * f_value)
    p = regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x)
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df1: int
    df2: int
    p: float
    group_means: tuple[float, ...]


def anova_one_way(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Standard one-way between-groups ANOVA.

    F = MSB/MSW with df (k-1, N-k); the p-value comes from ``f_sf``.
    Groups where every observation in the whole data set is identical have
    no variance to partition and raise DegenerateData.
    """
    if len(groups) < 2:
        raise InsufficientData("need at least two groups")
    sizes = [len(g) for g in groups]
    if any(n < 1 for n in sizes):
        raise InsufficientData("every group needs at least one observation")
    total_n = sum(sizes)
    k = len(groups)
    if total_n <= k:
        raise InsufficientData(f"N={total_n} must exceed the number of groups k={k}")
    means = [sum(g) / len(g) for g in groups]
    grand = sum(sum(g) for g in groups) / total_n
    ssb = sum(n * (m - grand) ** 2 for n, m in zip(sizes, means))
    ssw = sum(sum((y - m) ** 2 for y in g) for g, m in zip(groups, means))
    if ssb == 0.0 and ssw == 0.0:
        raise DegenerateData("all observations identical")
    df1, df2 = k - 1, total_n - k
    msb = ssb / df1
    msw = ssw / df2
    f = math.inf if msw == 0.0 else msb / msw
    return AnovaResult(f=f, df1=df1, df2=df2, p=f_sf(f, df1, df2), group_means=tuple(means))
