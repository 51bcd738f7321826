"""Nonparametric bootstrap over SNPs.

The SNP triple is the resampling unit, which preserves the within-SNP
dependence between the outcome-cohort statistics. Replicate ``b`` draws its
resample indices from an independent child stream of the configured seed,
so results do not depend on execution order or thread count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import norm

from .errors import DegenerateDesign, DegenerateInput, TooManyFailures, VanishingDenominator
from .summary_data import as_triple_arrays

#: Estimator failures that a resample may legitimately trigger; they are
#: counted and excluded rather than aborting the whole call.
_RESAMPLE_FAILURES = (VanishingDenominator, DegenerateDesign)


class CiKind(str, enum.Enum):
    NORMAL_APPROX = "NormalApprox"
    PERCENTILE = "Percentile"


@dataclass(frozen=True)
class BootstrapConfig:
    n_boot: int = 1000
    seed: int = 0
    ci_kind: CiKind = CiKind.NORMAL_APPROX
    level: float = 0.95

    def __post_init__(self):
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not (0.0 < self.level < 1.0):
            raise ValueError("level must be strictly between 0 and 1")
        object.__setattr__(self, "ci_kind", CiKind(self.ci_kind))


class BootstrapResult(NamedTuple):
    se: float
    ci_low: float
    ci_high: float
    n_failed: int


def stream_seed(seed: int, index: int, domain: int = 0) -> int:
    """Derive an independent 64-bit child seed for ``(seed, index, domain)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index, domain))
    return int(ss.generate_state(1, np.uint64)[0])


def _replicate_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))


def bootstrap(
    estimator: Callable,
    triples,
    cfg: BootstrapConfig,
    point: float | None = None,
) -> BootstrapResult:
    """Bootstrap standard error and confidence interval of ``estimator``.

    Parameters
    ----------
    estimator : callable
        Maps a sequence of harmonized triples to a real number.
    triples : sequence of HarmonizedTriple
        The full sample; must contain at least 2 SNPs.
    cfg : BootstrapConfig
        Replication count, seed, CI construction, and level.
    point : float, optional
        Precomputed full-sample estimate (used as the center of the
        normal-approximation CI); computed from ``estimator`` when absent.

    Returns
    -------
    BootstrapResult
        Sample standard deviation over successful replicates, CI bounds,
        and the number of excluded (failed) replicates.

    Raises
    ------
    DegenerateInput
        Fewer than 2 SNPs.
    TooManyFailures
        More than half of the replicates failed, or fewer than 2 succeeded.
    """
    arrays = as_triple_arrays(triples)
    p = len(arrays)
    if p < 2:
        raise DegenerateInput("bootstrap needs at least 2 SNPs")
    if point is None:
        point = float(estimator(arrays))

    values = np.empty(cfg.n_boot)
    ok = np.zeros(cfg.n_boot, dtype=bool)
    for b in range(cfg.n_boot):
        idx = _replicate_rng(cfg.seed, b).integers(0, p, size=p)
        try:
            values[b] = float(estimator(arrays.take(idx)))
        except _RESAMPLE_FAILURES:
            continue
        ok[b] = True

    n_failed = int(cfg.n_boot - ok.sum())
    if n_failed > cfg.n_boot / 2 or ok.sum() < 2:
        raise TooManyFailures(n_failed, cfg.n_boot)
    kept = values[ok]
    se = float(kept.std(ddof=1))
    if cfg.ci_kind is CiKind.NORMAL_APPROX:
        z = z_quantile(cfg.level)
        lo, hi = point - z * se, point + z * se
    else:
        tail = 0.5 * (1.0 - cfg.level)
        lo, hi = (float(q) for q in np.quantile(kept, [tail, 1.0 - tail]))
    return BootstrapResult(se=se, ci_low=lo, ci_high=hi, n_failed=n_failed)


def z_quantile(level: float) -> float:
    """Two-sided standard-normal critical value for the given level."""
    if not (0.0 < level < 1.0):
        raise ValueError("level must be strictly between 0 and 1")
    return float(norm.ppf(0.5 * (1.0 + level)))


def normal_ci(point: float, se: float, level: float) -> tuple[float, float]:
    z = z_quantile(level)
    if not math.isfinite(se):
        raise ValueError("standard error must be finite")
    return point - z * se, point + z * se
