"""Seeded Monte-Carlo harness for the estimator benchmark scenarios.

Generates two independent individual-level cohorts per replicate (one for
the treatment GWAS, one for the outcome GWAS), reduces each to marginal
summary statistics, and aggregates estimator performance over replicates
into relative bias / RMSE / CI-length / coverage tables.

Replicate ``r`` of a scenario depends only on ``(config.seed, r)``;
replicates may run on any number of threads without changing a single bit
of the output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .bootstrap import BootstrapConfig, stream_seed
from .errors import (
    DegenerateDesign,
    DegenerateInput,
    TooManyFailures,
    VanishingDenominator,
)
from .estimators import Method, estimate
from .summary_data import HarmonizedTriple, as_triple_arrays, marginal_regressions

THREADS_ENV_VAR = "MR_HETERO_THREADS"

_METHOD_FAILURES = (VanishingDenominator, DegenerateDesign, DegenerateInput, TooManyFailures)


@dataclass(frozen=True)
class GFunction:
    """Map from treatment-cohort to outcome-cohort SNP-exposure effects."""

    kind: str  # identity | affine | sinusoid | tabulated
    shift: float = 0.0
    scale: float = 1.0
    amplitude: float = 0.0
    frequency: float = 0.0
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "affine", "sinusoid", "tabulated"):
            raise ValueError(f"unknown g-function kind {self.kind!r}")
        if self.kind == "tabulated":
            if len(self.knots) < 1:
                raise ValueError("tabulated g needs at least one knot")
            xs = [x for x, _ in self.knots]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("tabulated knots must be strictly increasing in x")

    @classmethod
    def identity(cls) -> "GFunction":
        return cls(kind="identity")

    @classmethod
    def affine(cls, shift: float, scale: float) -> "GFunction":
        """g(x) = (x + shift) * scale"""
        return cls(kind="affine", shift=shift, scale=scale)

    @classmethod
    def sinusoid(cls, amplitude: float, frequency: float) -> "GFunction":
        """g(x) = amplitude * sin(frequency * x)"""
        return cls(kind="sinusoid", amplitude=amplitude, frequency=frequency)

    @classmethod
    def tabulated(cls, knots) -> "GFunction":
        """Piecewise-linear interpolation through ``knots``, clamped at the ends."""
        return cls(kind="tabulated", knots=tuple((float(x), float(y)) for x, y in knots))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x.copy()
        if self.kind == "affine":
            return (x + self.shift) * self.scale
        if self.kind == "sinusoid":
            return self.amplitude * np.sin(self.frequency * x)
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        return np.interp(x, xs, ys)

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "affine":
            out.update(shift=self.shift, scale=self.scale)
        elif self.kind == "sinusoid":
            out.update(amplitude=self.amplitude, frequency=self.frequency)
        elif self.kind == "tabulated":
            out["knots"] = [list(k) for k in self.knots]
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "GFunction":
        kind = d.get("kind")
        if kind == "identity":
            return cls.identity()
        if kind == "affine":
            return cls.affine(float(d["shift"]), float(d["scale"]))
        if kind == "sinusoid":
            return cls.sinusoid(float(d["amplitude"]), float(d["frequency"]))
        if kind == "tabulated":
            return cls.tabulated(d["knots"])
        raise ValueError(f"unknown g-function kind {kind!r}")


@dataclass(frozen=True)
class Pleiotropy:
    """Distribution of the per-SNP direct effects on the outcome."""

    kind: str  # none | balanced | idiosyncratic_single | idiosyncratic_multi | directional
    mu: float = 0.0
    tau0: float = 0.0
    n_contaminated: int = 0

    _KINDS = ("none", "balanced", "idiosyncratic_single", "idiosyncratic_multi", "directional")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown pleiotropy kind {self.kind!r}")
        if self.tau0 < 0:
            raise ValueError("tau0 must be nonnegative")
        if self.kind == "idiosyncratic_multi" and self.n_contaminated < 1:
            raise ValueError("idiosyncratic_multi needs n_contaminated >= 1")

    @classmethod
    def none(cls) -> "Pleiotropy":
        return cls(kind="none")

    @classmethod
    def balanced(cls, tau0: float = 0.02) -> "Pleiotropy":
        return cls(kind="balanced", tau0=tau0)

    @classmethod
    def idiosyncratic_single(cls, mu: float = 0.1, tau0: float = 0.02) -> "Pleiotropy":
        """One contaminated SNP: the one with the largest treatment-cohort effect."""
        return cls(kind="idiosyncratic_single", mu=mu, tau0=tau0)

    @classmethod
    def idiosyncratic_multi(cls, mu: float = 0.1, tau0: float = 0.02, k: int = 5) -> "Pleiotropy":
        """``k`` contaminated SNPs drawn without replacement per replicate."""
        return cls(kind="idiosyncratic_multi", mu=mu, tau0=tau0, n_contaminated=k)

    @classmethod
    def directional(cls, mu: float = 0.05, tau0: float = 0.02) -> "Pleiotropy":
        return cls(kind="directional", mu=mu, tau0=tau0)

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in ("idiosyncratic_single", "idiosyncratic_multi", "directional"):
            out["mu"] = self.mu
        if self.kind != "none":
            out["tau0"] = self.tau0
        if self.kind == "idiosyncratic_multi":
            out["n_contaminated"] = self.n_contaminated
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "Pleiotropy":
        kind = d.get("kind")
        if kind == "none":
            return cls.none()
        if kind == "balanced":
            return cls.balanced(float(d.get("tau0", 0.02)))
        if kind == "idiosyncratic_single":
            return cls.idiosyncratic_single(float(d.get("mu", 0.1)), float(d.get("tau0", 0.02)))
        if kind == "idiosyncratic_multi":
            return cls.idiosyncratic_multi(
                float(d.get("mu", 0.1)), float(d.get("tau0", 0.02)), int(d.get("n_contaminated", 5))
            )
        if kind == "directional":
            return cls.directional(float(d.get("mu", 0.05)), float(d.get("tau0", 0.02)))
        raise ValueError(f"unknown pleiotropy kind {kind!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one simulated benchmark scenario."""

    p: int = 200
    n: int = 10_000
    beta0: float = 0.5
    gamma_tr_low: float = 0.05
    gamma_tr_high: float = 0.10
    maf: float = 0.3
    g: GFunction = field(default_factory=GFunction.identity)
    pleiotropy: Pleiotropy = field(default_factory=Pleiotropy.none)
    n_replicates: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.n < 3:
            raise ValueError("n must be at least 3 to identify the marginal regressions")
        if not (0.0 < self.maf < 1.0):
            raise ValueError("maf must be strictly between 0 and 1")
        if not self.gamma_tr_low < self.gamma_tr_high:
            raise ValueError("gamma_tr_low must be below gamma_tr_high")
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "beta0": self.beta0,
            "gamma_tr_low": self.gamma_tr_low,
            "gamma_tr_high": self.gamma_tr_high,
            "maf": self.maf,
            "g": self.g.to_json_dict(),
            "pleiotropy": self.pleiotropy.to_json_dict(),
            "n_replicates": self.n_replicates,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ScenarioConfig":
        known = {
            "p", "n", "beta0", "gamma_tr_low", "gamma_tr_high",
            "maf", "g", "pleiotropy", "n_replicates", "seed",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in d.items() if k not in ("g", "pleiotropy")}
        for key in ("p", "n", "n_replicates", "seed"):
            if key in kwargs:
                v = kwargs[key]
                if isinstance(v, bool) or not (
                    isinstance(v, int) or (isinstance(v, float) and v.is_integer())
                ):
                    raise ValueError(f"{key} must be an integer, got {v!r}")
                kwargs[key] = int(v)
        if "g" in d:
            kwargs["g"] = GFunction.from_json_dict(d["g"])
        if "pleiotropy" in d:
            kwargs["pleiotropy"] = Pleiotropy.from_json_dict(d["pleiotropy"])
        return cls(**kwargs)


class ReplicateTruth(NamedTuple):
    """Population quantities behind one replicate's summary statistics."""

    gamma_tr: np.ndarray
    gamma_ou: np.ndarray
    alpha_star: np.ndarray
    alpha: np.ndarray


def _genotypes(rng: np.random.Generator, n: int, p: int, maf: float) -> np.ndarray:
    # Additive coding 0/1/2: two allele indicators drawn by inverse CDF and
    # summed, which is the exact binomial(2, maf) distribution.
    z = (rng.random((n, p)) < maf).astype(np.float64)
    z += rng.random((n, p)) < maf
    return z


def _draw_alpha(rng: np.random.Generator, model: Pleiotropy, gamma_tr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = gamma_tr.shape[0]
    star = np.zeros(p)
    if model.kind == "none":
        return star, np.zeros(p)
    if model.kind == "idiosyncratic_single":
        star[int(np.argmax(gamma_tr))] = model.mu
    elif model.kind == "idiosyncratic_multi":
        chosen = rng.choice(p, size=model.n_contaminated, replace=False)
        star[chosen] = model.mu
    elif model.kind == "directional":
        star[:] = model.mu
    return star, rng.normal(star, model.tau0)


def simulate_replicate(
    cfg: ScenarioConfig, r: int, return_truth: bool = False
) -> list[HarmonizedTriple] | tuple[list[HarmonizedTriple], ReplicateTruth]:
    """Generate replicate ``r`` of a scenario as harmonized summary triples.

    Draw order within the replicate stream is fixed: per-SNP effects, then
    pleiotropic effects, then the treatment cohort, then the outcome cohort.
    The same confounder enters both the exposure and the outcome of the
    outcome cohort, and both of that cohort's summary vectors come from the
    same sample, reproducing the dependence the estimators must tolerate.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(r,)))
    gamma_tr = rng.uniform(cfg.gamma_tr_low, cfg.gamma_tr_high, cfg.p)
    gamma_ou = cfg.g(gamma_tr)
    alpha_star, alpha = _draw_alpha(rng, cfg.pleiotropy, gamma_tr)

    # Treatment cohort: exposure only.
    Z = _genotypes(rng, cfg.n, cfg.p, cfg.maf)
    d = Z @ gamma_tr + rng.standard_normal(cfg.n) + rng.standard_normal(cfg.n)
    g_tr_hat, se_tr = marginal_regressions(Z, d)
    del Z, d

    # Outcome cohort: exposure and outcome from the same sample.
    Z = _genotypes(rng, cfg.n, cfg.p, cfg.maf)
    confounder = rng.standard_normal(cfg.n)
    d1 = Z @ gamma_ou + confounder + rng.standard_normal(cfg.n)
    y1 = cfg.beta0 * d1 + confounder + rng.standard_normal(cfg.n)
    if np.any(alpha):
        y1 += Z @ alpha
    g_ou_hat, se_ou = marginal_regressions(Z, d1)
    cap_hat, se_cap = marginal_regressions(Z, y1)
    del Z

    width = len(str(cfg.p))
    triples = [
        HarmonizedTriple(
            snp_id=f"snp{j + 1:0{width}d}",
            gamma_tr=float(g_tr_hat[j]),
            se_gamma_tr=float(se_tr[j]),
            gamma_ou=float(g_ou_hat[j]),
            se_gamma_ou=float(se_ou[j]),
            capgamma_ou=float(cap_hat[j]),
            se_capgamma_ou=float(se_cap[j]),
        )
        for j in range(cfg.p)
    ]
    if return_truth:
        return triples, ReplicateTruth(gamma_tr, gamma_ou, alpha_star, alpha)
    return triples


def oracle_mr_wald_variance(gamma_tr, gamma_ou, se_gamma_tr, se_gamma_ou, sigma_u) -> float:
    """Asymptotic variance of the ratio-of-slopes estimator at known truth.

    Simulation-only: ``sigma_u`` is the standard deviation of the combined
    outcome-side residual, which is not estimable from summary data alone.
    """
    gamma_tr = np.asarray(gamma_tr, dtype=float)
    gamma_ou = np.asarray(gamma_ou, dtype=float)
    se_gamma_tr = np.asarray(se_gamma_tr, dtype=float)
    se_gamma_ou = np.asarray(se_gamma_ou, dtype=float)
    sigma_u = np.asarray(sigma_u, dtype=float)
    if not (gamma_tr.shape == gamma_ou.shape == se_gamma_tr.shape == se_gamma_ou.shape == sigma_u.shape):
        raise ValueError("all five vectors must have equal length")
    if np.any(se_gamma_tr <= 0) or np.any(se_gamma_ou <= 0):
        raise ValueError("standard errors must be strictly positive")
    num = float(np.sum((gamma_tr**2 + se_gamma_tr**2) * sigma_u**2 / se_gamma_ou**4))
    den = float(np.sum(gamma_tr * gamma_ou / se_gamma_ou**2))
    den_scale = float(np.sum(np.abs(gamma_tr * gamma_ou) / se_gamma_ou**2))
    if den == 0.0 or abs(den) < 1e-12 * den_scale:
        raise VanishingDenominator("oracle variance denominator is zero", value=den)
    return num / den**2


@dataclass(frozen=True)
class MethodPerformance:
    """One method's aggregate over the replicates of a scenario."""

    bias_pct: float
    rmse_pct: float
    ci_length_pct: float
    coverage_pct: float
    n_replicates_used: int
    n_failed: int

    def to_json_dict(self) -> dict:
        return {
            "bias_pct": self.bias_pct,
            "rmse_pct": self.rmse_pct,
            "ci_length_pct": self.ci_length_pct,
            "coverage_pct": self.coverage_pct,
            "n_replicates_used": self.n_replicates_used,
            "n_failed": self.n_failed,
        }


@dataclass(frozen=True)
class ScenarioSummary:
    methods: dict[str, MethodPerformance]
    n_replicates: int

    def to_json_dict(self) -> dict:
        return {
            "n_replicates": self.n_replicates,
            "methods": {name: perf.to_json_dict() for name, perf in self.methods.items()},
        }


def thread_count() -> int:
    """Worker count for replicate execution; the env var caps and overrides."""
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


def _replicate_results(cfg: ScenarioConfig, methods, boot: BootstrapConfig, r: int) -> dict:
    triples = simulate_replicate(cfg, r)
    arrays = as_triple_arrays(triples)
    # Per-replicate bootstrap stream, derived on a branch of the bootstrap
    # seed disjoint from the data streams.
    boot_r = replace(boot, seed=stream_seed(boot.seed, r, domain=1))
    out = {}
    for m in methods:
        try:
            est = estimate(m, arrays, boot_r)
        except _METHOD_FAILURES:
            out[m] = None
        else:
            out[m] = (est.beta, est.ci_low, est.ci_high)
    return out


def run_scenario(
    cfg: ScenarioConfig,
    methods: Sequence[Method],
    boot: BootstrapConfig,
) -> ScenarioSummary:
    """Run all replicates of a scenario and aggregate per-method performance.

    All four reported metrics are relative to the true effect and expressed
    in percent: mean error, root-mean-square error, mean CI length, and the
    share of replicates whose CI covers the truth. Replicates where a method
    fails are excluded for that method and counted.

    Methods are evaluated in the order given (duplicates removed); the
    result is bit-identical for a fixed ``(cfg, boot)`` regardless of thread
    count.
    """
    methods = list(dict.fromkeys(Method(m) for m in methods))
    if not methods:
        raise DegenerateInput("at least one method required")
    if cfg.n_replicates < 2:
        raise DegenerateInput("at least 2 replicates required")

    workers = thread_count()
    if workers == 1:
        results = [_replicate_results(cfg, methods, boot, r) for r in range(cfg.n_replicates)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda r: _replicate_results(cfg, methods, boot, r), range(cfg.n_replicates))
            )

    summaries = {}
    for m in methods:
        rows = [res[m] for res in results if res[m] is not None]
        n_failed = cfg.n_replicates - len(rows)
        if not rows:
            summaries[m.value] = MethodPerformance(
                float("nan"), float("nan"), float("nan"), float("nan"), 0, n_failed
            )
            continue
        arr = np.asarray(rows, dtype=float)
        err = arr[:, 0] - cfg.beta0
        covered = (arr[:, 1] <= cfg.beta0) & (cfg.beta0 <= arr[:, 2])
        summaries[m.value] = MethodPerformance(
            bias_pct=float(err.mean() / cfg.beta0 * 100.0),
            rmse_pct=float(np.sqrt((err**2).mean()) / cfg.beta0 * 100.0),
            ci_length_pct=float((arr[:, 2] - arr[:, 1]).mean() / cfg.beta0 * 100.0),
            coverage_pct=float(covered.mean() * 100.0),
            n_replicates_used=len(rows),
            n_failed=n_failed,
        )
    return ScenarioSummary(methods=summaries, n_replicates=cfg.n_replicates)
