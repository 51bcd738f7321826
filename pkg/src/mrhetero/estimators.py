"""Causal-effect estimators built from the regression kernels.

The three ratio-of-slopes estimators share one design: fit the
outcome-cohort exposure associations on the treatment-cohort ones, fit the
outcome associations on the same regressor, and take the ratio. The
single-sample biases of the two fits cancel in the ratio, which is what
makes the construction robust to cross-cohort differences in the SNP
effects. Baseline estimators from the MR literature are provided under the
same interface for comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bootstrap import BootstrapConfig, bootstrap, normal_ci
from .errors import VanishingDenominator
from .kernels import WeightedPairs
from .summary_data import TripleArrays, as_triple_arrays


class Method(str, enum.Enum):
    MR_WALD = "MrWald"
    MR_WALD_R = "MrWaldR"
    MR_WALD_D = "MrWaldD"
    IVW = "Ivw"
    DIVW = "Divw"
    EGGER = "Egger"
    WEIGHTED_MEDIAN = "WeightedMedian"


@dataclass(frozen=True)
class MrEstimate:
    """One method's causal-effect estimate with optional inference."""

    method: Method
    beta: float
    n_snps: int
    se: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    level: float = 0.95
    auxiliary: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise ValueError("level must be strictly between 0 and 1")

    def to_json_dict(self) -> dict:
        ci = None
        if self.ci_low is not None and self.ci_high is not None:
            ci = [self.ci_low, self.ci_high]
        return {
            "method": self.method.value,
            "beta": self.beta,
            "se": self.se,
            "ci": ci,
            "level": self.level,
            "n_snps": self.n_snps,
            "auxiliary": dict(self.auxiliary),
        }


def _ratio_guard(numerator: float, denominator: float, a: TripleArrays, what: str) -> float:
    # Scale-free threshold: |den| is compared against the natural size of a
    # slope of gamma_ou on gamma_tr, so rescaling either axis cannot change
    # the outcome of the guard.
    scale = float(np.max(np.abs(a.gamma_ou))) / float(np.max(np.abs(a.gamma_tr)))
    if abs(denominator) <= 1e-12 * scale:
        raise VanishingDenominator(
            f"{what}: exposure-on-exposure slope is indistinguishable from zero",
            value=denominator,
        )
    return numerator / denominator


def _mr_wald_point(a: TripleArrays) -> tuple[float, dict]:
    num = kernels.wls_origin(WeightedPairs(a.gamma_tr, a.capgamma_ou, a.se_capgamma_ou**-2))
    den = kernels.wls_origin(WeightedPairs(a.gamma_tr, a.gamma_ou, a.se_gamma_ou**-2))
    beta = _ratio_guard(num, den, a, "MrWald")
    return beta, {"numerator_slope": num, "denominator_slope": den}


def _mr_wald_r_point(a: TripleArrays) -> tuple[float, dict]:
    # Both fits must use the same absolute-error loss: mixing losses between
    # the two regressions biases the ratio even without contamination.
    w_exposure = float(a.se_capgamma_ou.min()) / a.se_capgamma_ou
    w_outcome = float(a.se_gamma_ou.min()) / a.se_gamma_ou
    den = kernels.l1_origin(WeightedPairs(a.gamma_tr, a.gamma_ou, w_exposure))
    num = kernels.l1_origin(WeightedPairs(a.gamma_tr, a.capgamma_ou, w_outcome))
    beta = _ratio_guard(num, den, a, "MrWaldR")
    return beta, {"numerator_slope": num, "denominator_slope": den}


def _mr_wald_d_point(a: TripleArrays) -> tuple[float, dict]:
    num, num_int = kernels.wls_intercept(
        WeightedPairs(a.gamma_tr, a.capgamma_ou, a.se_capgamma_ou**-2)
    )
    den, den_int = kernels.wls_intercept(
        WeightedPairs(a.gamma_tr, a.gamma_ou, a.se_gamma_ou**-2)
    )
    beta = _ratio_guard(num, den, a, "MrWaldD")
    return beta, {
        "numerator_slope": num,
        "denominator_slope": den,
        "numerator_intercept": num_int,
        "denominator_intercept": den_int,
    }


def _ivw_point(a: TripleArrays) -> tuple[float, dict]:
    beta = kernels.wls_origin(WeightedPairs(a.gamma_tr, a.capgamma_ou, a.se_capgamma_ou**-2))
    return beta, {}


def _divw_point(a: TripleArrays) -> tuple[float, dict]:
    beta = kernels.divw(a)
    return beta, {"analytic_variance": kernels.divw_variance(a, beta)}


def _egger_point(a: TripleArrays) -> tuple[float, dict]:
    slope, intercept = kernels.wls_intercept(
        WeightedPairs(a.gamma_tr, a.capgamma_ou, a.se_capgamma_ou**-2)
    )
    return slope, {"intercept": intercept}


def _weighted_median_point(a: TripleArrays) -> tuple[float, dict]:
    return kernels.weighted_median_ratio(a), {}


_POINT = {
    Method.MR_WALD: _mr_wald_point,
    Method.MR_WALD_R: _mr_wald_r_point,
    Method.MR_WALD_D: _mr_wald_d_point,
    Method.IVW: _ivw_point,
    Method.DIVW: _divw_point,
    Method.EGGER: _egger_point,
    Method.WEIGHTED_MEDIAN: _weighted_median_point,
}


def point_estimator(method: Method):
    """Plain callable ``triples -> beta`` for the given method (bootstrap-ready)."""
    fn = _POINT[Method(method)]

    def call(triples) -> float:
        return fn(as_triple_arrays(triples))[0]

    call.__name__ = f"point_{Method(method).value}"
    return call


def point_estimate(method: Method, triples) -> MrEstimate:
    """Point estimate without inference."""
    a = as_triple_arrays(triples)
    beta, aux = _POINT[Method(method)](a)
    return MrEstimate(method=Method(method), beta=beta, n_snps=len(a), auxiliary=aux)


def estimate(method: Method, triples, boot: BootstrapConfig | None = None) -> MrEstimate:
    """Point estimate with a confidence interval.

    All methods take bootstrap-over-SNPs intervals except the debiased IVW,
    which ships its own plug-in asymptotic variance and is reported with the
    matching normal interval (the variance the method is known by).
    """
    method = Method(method)
    a = as_triple_arrays(triples)
    beta, aux = _POINT[method](a)
    if boot is None:
        return MrEstimate(method=method, beta=beta, n_snps=len(a), auxiliary=aux)

    if method is Method.DIVW:
        se = math.sqrt(aux["analytic_variance"])
        lo, hi = normal_ci(beta, se, boot.level)
        return MrEstimate(
            method=method,
            beta=beta,
            n_snps=len(a),
            se=se,
            ci_low=lo,
            ci_high=hi,
            level=boot.level,
            auxiliary=aux,
        )

    res = bootstrap(point_estimator(method), a, boot, point=beta)
    aux = {**aux, "bootstrap_failed": float(res.n_failed)}
    return MrEstimate(
        method=method,
        beta=beta,
        n_snps=len(a),
        se=res.se,
        ci_low=res.ci_low,
        ci_high=res.ci_high,
        level=boot.level,
        auxiliary=aux,
    )


def mr_wald(triples) -> MrEstimate:
    """Ratio of the two inverse-variance weighted origin slopes."""
    return point_estimate(Method.MR_WALD, triples)


def mr_wald_r(triples) -> MrEstimate:
    """Ratio of the two weighted absolute-error origin slopes."""
    return point_estimate(Method.MR_WALD_R, triples)


def mr_wald_d(triples) -> MrEstimate:
    """Ratio of the two intercept-adjusted weighted slopes.

    The intercepts absorb a common directional (nonzero-mean) pleiotropic
    shift; both are reported in ``auxiliary``.
    """
    return point_estimate(Method.MR_WALD_D, triples)
