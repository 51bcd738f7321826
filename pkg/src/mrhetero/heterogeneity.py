"""Global test for cross-cohort differences in the SNP-exposure effects.

Compares the two exposure-association vectors SNP by SNP: under the null
that both cohorts share the same per-SNP effects (and given normal,
independent summary statistics), the sum of squared standardized
differences is chi-square with one degree of freedom per SNP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence
from .summary_data import as_triple_arrays

_MAX_ITER = 500
_TERM_TOL = 1e-14


@dataclass(frozen=True)
class HetTestResult:
    statistic: float
    df: int
    p_value: float
    per_snp: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "per_snp": list(self.per_snp),
        }


def het_test(triples) -> HetTestResult:
    """Chi-square homogeneity test of the two exposure-association vectors.

    Per-SNP contribution: ``(gamma_ou - gamma_tr)^2 / (se_ou^2 + se_tr^2)``.
    The global statistic is their sum, referred to a chi-square distribution
    with ``p`` degrees of freedom; the p-value is the upper tail.
    """
    a = as_triple_arrays(triples)
    contrib = (a.gamma_ou - a.gamma_tr) ** 2 / (a.se_gamma_ou**2 + a.se_gamma_tr**2)
    statistic = float(contrib.sum())
    df = len(a)
    return HetTestResult(
        statistic=statistic,
        df=df,
        p_value=chisq_sf(statistic, df),
        per_snp=tuple(float(c) for c in contrib),
    )


def chisq_sf(x: float, df: int) -> float:
    """Chi-square survival function ``P(X >= x)`` for ``X ~ chi2(df)``.

    Evaluates the regularized upper incomplete gamma function
    ``Q(df/2, x/2)`` with the usual regime split: a lower-tail series for
    ``x < df + 1`` and a continued fraction otherwise. Both iterations stop
    when the running term falls below 1e-14 of the accumulated value and
    raise :class:`~mrhetero.errors.NonConvergence` past 500 iterations.
    """
    if not x >= 0.0:
        raise ValueError("x must be nonnegative")
    if not (isinstance(df, (int, np.integer)) and df >= 1):
        raise ValueError("df must be a positive integer")
    if x == 0.0:
        return 1.0
    a = 0.5 * df
    hx = 0.5 * x
    if x < df + 1.0:
        return min(max(1.0 - _gamma_p_series(a, hx), 0.0), 1.0)
    return min(max(_gamma_q_contfrac(a, hx), 0.0), 1.0)


def _log_prefactor(a: float, hx: float) -> float:
    return -hx + a * math.log(hx) - math.lgamma(a)


def _gamma_p_series(a: float, hx: float) -> float:
    """Lower regularized incomplete gamma by power series."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= hx / denom
        total += term
        if abs(term) < abs(total) * _TERM_TOL:
            return total * math.exp(_log_prefactor(a, hx))
    raise NonConvergence("incomplete gamma series")


def _gamma_q_contfrac(a: float, hx: float) -> float:
    """Upper regularized incomplete gamma by modified Lentz continued fraction."""
    tiny = 1e-300
    b = hx + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _TERM_TOL:
            return math.exp(_log_prefactor(a, hx)) * h
    raise NonConvergence("incomplete gamma continued fraction")
