"""Regression primitives shared by the MR estimators.

All kernels are pure functions of their inputs and safe to call
concurrently. Closed forms are used throughout; the L1 slope reduces to a
weighted median of per-point ratios.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateDesign, VanishingDenominator
from .summary_data import as_triple_arrays

# Relative guard for ratio denominators; chosen scale-free so that unit
# changes in the inputs cannot alter which inputs are rejected.
REL_DENOM_TOL = 1e-12


@dataclass(frozen=True)
class WeightedPairs:
    """A weighted univariate regression problem: response ``y`` on ``x``."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if not (self.x.ndim == self.y.ndim == self.w.ndim == 1):
            raise ValueError("x, y, w must be 1-D")
        if not (self.x.shape == self.y.shape == self.w.shape):
            raise ValueError("x, y, w must have equal length")
        if self.p < 1:
            raise ValueError("at least one point required")
        if not np.all(self.w > 0):
            raise ValueError("all weights must be strictly positive")

    @property
    def p(self) -> int:
        return self.x.shape[0]


def wls_origin(d: WeightedPairs) -> float:
    """Weighted least-squares slope of the line through the origin.

    Minimizes ``sum_j w_j (y_j - beta * x_j)^2``; the closed form is
    ``sum(w x y) / sum(w x^2)``.
    """
    sxx = float(np.dot(d.w * d.x, d.x))
    if sxx <= 0.0:
        raise DegenerateDesign("all regressors are zero; origin slope is not identified")
    return float(np.dot(d.w * d.x, d.y)) / sxx


def wls_intercept(d: WeightedPairs) -> tuple[float, float]:
    """Weighted least-squares fit of ``y = slope * x + intercept``.

    Requires at least 3 points so that slope, intercept, and a residual
    scale are all identified.
    """
    if d.p < 3:
        raise DegenerateDesign("at least 3 points required for the intercept fit")
    sw = float(d.w.sum())
    xm = float(np.dot(d.w, d.x)) / sw
    ym = float(np.dot(d.w, d.y)) / sw
    xc = d.x - xm
    sxx = float(np.dot(d.w * xc, xc))
    # Exactly-constant x leaves only rounding noise after centering.
    if sxx <= 1e-28 * float(np.dot(d.w * d.x, d.x)):
        raise DegenerateDesign("regressor is weighted-constant; slope is not identified")
    slope = float(np.dot(d.w * xc, d.y - ym)) / sxx
    return slope, ym - slope * xm


def _weighted_median(values: np.ndarray, masses: np.ndarray) -> float:
    """Minimizer of ``sum_j m_j |v_j - t|``; midpoint when the minimum is flat."""
    order = np.argsort(values)
    v = values[order]
    cum = np.cumsum(masses[order])
    half = 0.5 * cum[-1]
    k = int(np.searchsorted(cum, half))
    if cum[k] == half and k + 1 < v.shape[0]:
        return 0.5 * (float(v[k]) + float(v[k + 1]))
    return float(v[k])


def l1_origin(d: WeightedPairs) -> float:
    """Slope through the origin under absolute-error loss.

    Minimizes ``sum_j w_j |y_j - beta * x_j|``. Points with ``x_j = 0``
    contribute a constant and are ignored; the rest rewrite the objective
    as ``sum_j w_j |x_j| * |y_j/x_j - beta|``, whose minimizer is the
    weighted median of the ratios. A flat minimizing interval resolves to
    its midpoint.
    """
    nz = d.x != 0.0
    if not np.any(nz):
        raise DegenerateDesign("all regressors are zero; origin slope is not identified")
    ratios = d.y[nz] / d.x[nz]
    masses = d.w[nz] * np.abs(d.x[nz])
    return _weighted_median(ratios, masses)


def weighted_median_ratio(triples) -> float:
    """Weighted median of the per-SNP ratio estimates.

    Each usable SNP contributes ``capgamma_ou / gamma_tr`` weighted by the
    inverse of its first-order (delta-method) variance. SNPs with a zero
    exposure association are dropped with a warning. The median is the
    standard interpolated one: cumulative weight fractions
    ``s_j = (cum_j - w_j/2) / total`` with linear interpolation at 0.5.
    """
    a = as_triple_arrays(triples)
    usable = a.gamma_tr != 0.0
    n_dropped = int((~usable).sum())
    if n_dropped:
        warnings.warn(f"dropped {n_dropped} SNPs with zero exposure association", stacklevel=2)
    if not np.any(usable):
        raise DegenerateDesign("no SNP with a nonzero exposure association")
    g = a.gamma_tr[usable]
    ratios = a.capgamma_ou[usable] / g
    var = a.se_capgamma_ou[usable] ** 2 / g**2 + (
        a.capgamma_ou[usable] ** 2 * a.se_gamma_tr[usable] ** 2
    ) / g**4
    w = 1.0 / var
    order = np.argsort(ratios)
    r = ratios[order]
    ws = w[order]
    s = (np.cumsum(ws) - 0.5 * ws) / ws.sum()
    return float(np.interp(0.5, s, r))


def divw(triples) -> float:
    """Debiased inverse-variance weighted slope.

    Corrects weak-instrument bias by subtracting the exposure sampling
    variance from the squared exposure association in the denominator:
    ``sum(G g / sG^2) / sum((g^2 - s_tr^2) / sG^2)``.
    """
    a = as_triple_arrays(triples)
    w = a.se_capgamma_ou**-2
    num = float(np.dot(w * a.capgamma_ou, a.gamma_tr))
    den = float(np.dot(w, a.gamma_tr**2 - a.se_gamma_tr**2))
    scale = float(np.dot(w, a.gamma_tr**2))
    if den == 0.0 or abs(den) < REL_DENOM_TOL * scale:
        raise VanishingDenominator(
            "debiased instrument strength is indistinguishable from zero", value=den
        )
    return num / den


def divw_variance(triples, beta: float | None = None) -> float:
    """Plug-in asymptotic variance of the debiased IVW slope.

    Uses the debiased ``gamma_tr^2 - se_gamma_tr^2`` in place of the
    unobservable squared true association and the point estimate in place
    of the true effect.
    """
    a = as_triple_arrays(triples)
    if beta is None:
        beta = divw(triples)
    strength = (a.gamma_tr**2 - a.se_gamma_tr**2) / a.se_capgamma_ou**2
    noise = a.se_gamma_tr**2 / a.se_capgamma_ou**2
    num = float(np.sum(strength + noise + beta**2 * noise * (strength + 2.0 * noise)))
    den = float(np.sum(strength)) ** 2
    if den == 0.0:
        raise VanishingDenominator("debiased instrument strength is zero", value=0.0)
    return num / den


class IvStrength(NamedTuple):
    kappa_tr: float
    kappa_ou: float
    kappa_co: float


def iv_strength_diagnostics(triples) -> IvStrength:
    """Average instrument-strength diagnostics for the two cohorts.

    Plug-in estimates of the mean squared standardized associations, each
    debiased by its own noise contribution and floored at zero (the targets
    are squared quantities, so negative plug-ins are noise). ``kappa_co``
    averages the per-SNP geometric mean of the two.
    """
    a = as_triple_arrays(triples)
    k_tr = np.maximum((a.gamma_tr / a.se_gamma_tr) ** 2 - 1.0, 0.0)
    k_ou = np.maximum(
        (a.gamma_ou / a.se_gamma_tr) ** 2 - a.se_gamma_ou**2 / a.se_gamma_tr**2, 0.0
    )
    k_co = np.sqrt(k_tr * k_ou)
    return IvStrength(float(k_tr.mean()), float(k_ou.mean()), float(k_co.mean()))
