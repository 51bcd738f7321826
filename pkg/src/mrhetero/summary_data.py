"""GWAS summary-statistics input handling.

Parses headered TSV files of per-SNP marginal association estimates,
aligns effect alleles across the three required inputs (treatment-cohort
exposure, outcome-cohort exposure, outcome-cohort outcome), and computes
marginal regression summaries from individual-level matrices for the
simulator.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    DegenerateGenotype,
    DuplicateSnpId,
    EmptyIntersection,
    MalformedRow,
    MissingColumn,
)

#: Logical field -> default header name. Override any subset via the
#: ``columns`` argument of :func:`parse_summary_file`.
DEFAULT_COLUMNS = {
    "snp": "snp",
    "effect_allele": "effect_allele",
    "other_allele": "other_allele",
    "beta": "beta",
    "se": "se",
    "n": "n",
}

_PALINDROMIC_PAIRS = ({"A", "T"}, {"C", "G"})


@dataclass(frozen=True)
class SnpRecord:
    """One SNP's marginal association from a single study."""

    snp_id: str
    effect_allele: str
    other_allele: str
    beta: float
    se: float
    n: int | None = None

    def __post_init__(self):
        if not self.snp_id:
            raise ValueError("empty SNP id")
        if not self.effect_allele or not self.other_allele:
            raise ValueError("empty allele token")
        if self.effect_allele == self.other_allele:
            raise ValueError("effect and other allele are identical")
        if not math.isfinite(self.beta):
            raise ValueError("beta is not finite")
        if not (math.isfinite(self.se) and self.se > 0):
            raise ValueError("se must be a positive finite number")
        if self.n is not None and self.n <= 0:
            raise ValueError("n must be a positive count")


@dataclass(frozen=True)
class HarmonizedTriple:
    """Aligned per-SNP summary statistics from all three inputs.

    After harmonization all three beta estimates refer to the same effect
    allele (the treatment file's orientation).
    """

    snp_id: str
    gamma_tr: float
    se_gamma_tr: float
    gamma_ou: float
    se_gamma_ou: float
    capgamma_ou: float
    se_capgamma_ou: float

    def __post_init__(self):
        for name in ("se_gamma_tr", "se_gamma_ou", "se_capgamma_ou"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number")
        for name in ("gamma_tr", "gamma_ou", "capgamma_ou"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")


@dataclass(frozen=True)
class HarmonizationReport:
    """Per-category SNP accounting for one harmonization pass.

    ``kept + dropped_mismatch + dropped_palindromic`` equals the size of the
    three-way id intersection; ``dropped_missing`` counts ids present in some
    but not all inputs.
    """

    kept: int
    flipped: int
    dropped_mismatch: int
    dropped_palindromic: int
    dropped_missing: int

    def to_json_dict(self) -> dict:
        return asdict(self)


class TripleArrays(Sequence):
    """Columnar view of a list of :class:`HarmonizedTriple`.

    Behaves as an immutable sequence of triples while exposing the seven
    fields as NumPy arrays, which is what the estimators and the resampling
    loop actually consume.
    """

    __slots__ = (
        "snp_ids",
        "gamma_tr",
        "se_gamma_tr",
        "gamma_ou",
        "se_gamma_ou",
        "capgamma_ou",
        "se_capgamma_ou",
    )

    def __init__(self, snp_ids, gamma_tr, se_gamma_tr, gamma_ou, se_gamma_ou,
                 capgamma_ou, se_capgamma_ou):
        self.snp_ids = np.asarray(snp_ids, dtype=object)
        self.gamma_tr = np.asarray(gamma_tr, dtype=float)
        self.se_gamma_tr = np.asarray(se_gamma_tr, dtype=float)
        self.gamma_ou = np.asarray(gamma_ou, dtype=float)
        self.se_gamma_ou = np.asarray(se_gamma_ou, dtype=float)
        self.capgamma_ou = np.asarray(capgamma_ou, dtype=float)
        self.se_capgamma_ou = np.asarray(se_capgamma_ou, dtype=float)

    @classmethod
    def from_triples(cls, triples: Sequence[HarmonizedTriple]) -> "TripleArrays":
        t = list(triples)
        return cls(
            [x.snp_id for x in t],
            [x.gamma_tr for x in t],
            [x.se_gamma_tr for x in t],
            [x.gamma_ou for x in t],
            [x.se_gamma_ou for x in t],
            [x.capgamma_ou for x in t],
            [x.se_capgamma_ou for x in t],
        )

    def take(self, indices) -> "TripleArrays":
        """Row subset (with repetition allowed), e.g. a bootstrap resample."""
        return TripleArrays(
            self.snp_ids[indices],
            self.gamma_tr[indices],
            self.se_gamma_tr[indices],
            self.gamma_ou[indices],
            self.se_gamma_ou[indices],
            self.capgamma_ou[indices],
            self.se_capgamma_ou[indices],
        )

    def __len__(self) -> int:
        return self.gamma_tr.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return HarmonizedTriple(
            self.snp_ids[i],
            float(self.gamma_tr[i]),
            float(self.se_gamma_tr[i]),
            float(self.gamma_ou[i]),
            float(self.se_gamma_ou[i]),
            float(self.capgamma_ou[i]),
            float(self.se_capgamma_ou[i]),
        )


def as_triple_arrays(triples) -> TripleArrays:
    if isinstance(triples, TripleArrays):
        return triples
    return TripleArrays.from_triples(triples)


def parse_summary_file(path, columns: dict | None = None, lenient: bool = False) -> list[SnpRecord]:
    """Read one tab-delimited summary-statistics file.

    Parameters
    ----------
    path : str or Path
        UTF-8 TSV file with one header row.
    columns : dict, optional
        Overrides for :data:`DEFAULT_COLUMNS` (logical name -> header name).
        The ``n`` column is optional; all others are required.
    lenient : bool
        When true, rows with unparseable fields are counted and dropped
        (a warning reports the count) instead of raising
        :class:`~mrhetero.errors.MalformedRow`.

    Raises
    ------
    MissingColumn, MalformedRow, DuplicateSnpId
    """
    colmap = {**DEFAULT_COLUMNS, **(columns or {})}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None:
            raise MalformedRow(1, "file has no header row")
        names = [h.strip() for h in header]
        positions = {}
        for field in ("snp", "effect_allele", "other_allele", "beta", "se"):
            try:
                positions[field] = names.index(colmap[field])
            except ValueError:
                raise MissingColumn(colmap[field]) from None
        n_pos = names.index(colmap["n"]) if colmap["n"] in names else None

        records: list[SnpRecord] = []
        seen: set[str] = set()
        n_dropped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                record = _row_to_record(row, positions, n_pos)
            except (ValueError, IndexError) as exc:
                if lenient:
                    n_dropped += 1
                    continue
                raise MalformedRow(lineno, str(exc)) from exc
            if record.snp_id in seen:
                raise DuplicateSnpId(record.snp_id)
            seen.add(record.snp_id)
            records.append(record)
    if n_dropped:
        warnings.warn(f"dropped {n_dropped} malformed rows from {path}", stacklevel=2)
    return records


def _row_to_record(row, positions, n_pos) -> SnpRecord:
    n = None
    if n_pos is not None and n_pos < len(row):
        raw = row[n_pos].strip()
        if raw not in ("", "NA", "na", "nan", "."):
            n = int(float(raw))
    return SnpRecord(
        snp_id=row[positions["snp"]].strip(),
        effect_allele=row[positions["effect_allele"]].strip().upper(),
        other_allele=row[positions["other_allele"]].strip().upper(),
        beta=float(row[positions["beta"]]),
        se=float(row[positions["se"]]),
        n=n,
    )


def _index_unique(records: Sequence[SnpRecord]) -> dict[str, SnpRecord]:
    out: dict[str, SnpRecord] = {}
    for rec in records:
        if rec.snp_id in out:
            raise DuplicateSnpId(rec.snp_id)
        out[rec.snp_id] = rec
    return out


def _is_palindromic(rec: SnpRecord) -> bool:
    return {rec.effect_allele, rec.other_allele} in _PALINDROMIC_PAIRS


def _orientation(anchor: SnpRecord, other: SnpRecord) -> int | None:
    """+1 if alleles match the anchor's order, -1 if reversed, None otherwise."""
    if other.effect_allele == anchor.effect_allele and other.other_allele == anchor.other_allele:
        return 1
    if other.effect_allele == anchor.other_allele and other.other_allele == anchor.effect_allele:
        return -1
    return None


def harmonize(
    treatment: Sequence[SnpRecord],
    outcome_exposure: Sequence[SnpRecord],
    outcome: Sequence[SnpRecord],
    policy: str = "drop",
) -> tuple[list[HarmonizedTriple], HarmonizationReport]:
    """Align the three inputs on shared SNPs and a common effect allele.

    The treatment file fixes the allele orientation. Records from the two
    outcome-cohort files with reversed allele order get their beta sign
    flipped; records matching neither orientation drop the SNP. Palindromic
    SNPs (A/T or C/G) are dropped under ``policy="drop"`` because strand
    cannot be resolved from betas alone; ``policy="keep"`` trusts the stated
    orientation.
    """
    if policy not in ("drop", "keep"):
        raise ValueError(f"palindromic policy must be 'drop' or 'keep', got {policy!r}")
    tr_ids = _index_unique(treatment)
    oug = _index_unique(outcome_exposure)
    ouG = _index_unique(outcome)
    union = set(tr_ids) | set(oug) | set(ouG)
    shared = set(tr_ids) & set(oug) & set(ouG)

    triples: list[HarmonizedTriple] = []
    flipped = mismatched = palindromic = 0
    for rec in treatment:  # treatment-file order keeps output deterministic
        sid = rec.snp_id
        if sid not in shared:
            continue
        if policy == "drop" and _is_palindromic(rec):
            palindromic += 1
            continue
        sign_g = _orientation(rec, oug[sid])
        sign_G = _orientation(rec, ouG[sid])
        if sign_g is None or sign_G is None:
            mismatched += 1
            continue
        if sign_g < 0 or sign_G < 0:
            flipped += 1
        g, G = oug[sid], ouG[sid]
        triples.append(
            HarmonizedTriple(
                snp_id=sid,
                gamma_tr=rec.beta,
                se_gamma_tr=rec.se,
                gamma_ou=sign_g * g.beta,
                se_gamma_ou=g.se,
                capgamma_ou=sign_G * G.beta,
                se_capgamma_ou=G.se,
            )
        )
    if not triples:
        raise EmptyIntersection()
    report = HarmonizationReport(
        kept=len(triples),
        flipped=flipped,
        dropped_mismatch=mismatched,
        dropped_palindromic=palindromic,
        dropped_missing=len(union) - len(shared),
    )
    return triples, report


def marginal_regression(z, y) -> tuple[float, float]:
    """Slope and standard error of the simple regression of ``y`` on ``z``.

    Returns the covariance/variance slope together with the usual OLS
    standard error ``sqrt(RSS / (n - 2) / sum((z - zbar)^2))`` from the fit
    with intercept. Requires ``n >= 3`` and a non-constant ``z``.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.ndim != 1 or z.shape != y.shape:
        raise ValueError("z and y must be 1-D vectors of equal length")
    n = z.shape[0]
    if n < 3:
        raise ValueError("at least 3 observations required")
    zc = z - z.mean()
    ss = float(zc @ zc)
    if ss <= 0.0:
        raise DegenerateGenotype()
    yc = y - y.mean()
    beta = float(zc @ yc) / ss
    rss = max(float(yc @ yc) - beta * float(zc @ yc), 0.0)
    se = math.sqrt(rss / (n - 2) / ss)
    return beta, se


def marginal_regressions(Z, y) -> tuple[np.ndarray, np.ndarray]:
    """Columnwise :func:`marginal_regression` for an ``n x p`` design matrix."""
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    n = Z.shape[0]
    if n < 3:
        raise ValueError("at least 3 observations required")
    col_mean = Z.mean(axis=0)
    ss = np.einsum("ij,ij->j", Z, Z) - n * col_mean**2
    if np.any(ss <= 0.0):
        raise DegenerateGenotype("one or more genotype columns are constant")
    yc = y - y.mean()
    szy = Z.T @ yc
    beta = szy / ss
    rss = np.maximum(float(yc @ yc) - beta * szy, 0.0)
    se = np.sqrt(rss / (n - 2) / ss)
    return beta, se
