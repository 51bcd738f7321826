"""Batch command-line front end.

Three subcommands: ``analyze`` (parse, harmonize, test, estimate),
``het-test`` (the homogeneity test alone), and ``simulate`` (the seeded
benchmark harness). Results go to stdout (or ``--output``) as JSON or TSV;
diagnostics and error records go to stderr. Exit codes: 0 success, 2 data
or usage errors, 1 internal errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bootstrap import BootstrapConfig, CiKind
from .errors import DataError, MrHeteroError
from .estimators import Method, estimate
from .heterogeneity import het_test
from .simulation import GFunction, Pleiotropy, ScenarioConfig, run_scenario
from .summary_data import harmonize, parse_summary_file

SIG_FIGURES = 6

_METHOD_ALIASES = {
    "mrwald": Method.MR_WALD,
    "mr-wald": Method.MR_WALD,
    "mrwaldr": Method.MR_WALD_R,
    "mr-wald-r": Method.MR_WALD_R,
    "mrwaldd": Method.MR_WALD_D,
    "mr-wald-d": Method.MR_WALD_D,
    "ivw": Method.IVW,
    "divw": Method.DIVW,
    "egger": Method.EGGER,
    "weightedmedian": Method.WEIGHTED_MEDIAN,
    "weighted-median": Method.WEIGHTED_MEDIAN,
    "wmedian": Method.WEIGHTED_MEDIAN,
}

_SCENARIOS = {
    "i": Pleiotropy.none(),
    "ii": Pleiotropy.balanced(0.02),
    "iii": Pleiotropy.idiosyncratic_single(0.1, 0.02),
    "iv": Pleiotropy.idiosyncratic_multi(0.1, 0.02, 5),
    "v": Pleiotropy.directional(0.05, 0.02),
}

# The directional scenario is benchmarked at a larger cohort size.
_SCENARIO_DEFAULT_N = {"v": 100_000}


def _parse_methods(raw: str) -> list[Method]:
    methods = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        key = token.lower()
        if key not in _METHOD_ALIASES:
            raise DataError(f"unknown method {token!r}", method=token)
        methods.append(_METHOD_ALIASES[key])
    if not methods:
        raise DataError("at least one method must be selected")
    return list(dict.fromkeys(methods))


def _parse_columns(raw: str | None) -> dict | None:
    if raw is None:
        return None
    out = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"column override {part!r} is not of the form field=header")
        field, header = part.split("=", 1)
        out[field.strip()] = header.strip()
    return out


def _parse_g(raw: str) -> GFunction:
    if raw == "identity":
        return GFunction.identity()
    if raw == "shift":
        return GFunction.affine(0.1, 0.5)
    if raw == "sine":
        return GFunction.sinusoid(0.2, 5.0 * math.pi)
    if raw.startswith("table:"):
        return GFunction.tabulated(_load_knots(raw[len("table:"):]))
    raise DataError(f"unknown g specification {raw!r}", g=raw)


def _load_knots(path: str) -> list[tuple[float, float]]:
    knots = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.replace("\t", " ").split()
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected two numeric columns")
                knots.append((float(parts[0]), float(parts[1])))
    except FileNotFoundError:
        raise DataError(f"g table file not found: {path}", path=path) from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}", path=path) from None
    if not knots:
        raise DataError(f"g table file {path} contains no knots", path=path)
    return knots


def _round_doc(obj):
    """Round every float in a JSON-style document to 6 significant figures."""
    if isinstance(obj, float):
        return float(f"{obj:.{SIG_FIGURES}g}")
    if isinstance(obj, dict):
        return {k: _round_doc(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_doc(v) for v in obj]
    return obj


def _emit(doc_json: dict, tsv_text: str | None, args) -> None:
    if args.output_format == "json":
        text = json.dumps(doc_json) + "\n"
    else:
        if tsv_text is None:
            raise DataError("this command has no TSV form")
        text = tsv_text
    if args.output is None or args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG_FIGURES}g}"
    return str(v)


def _load_inputs(args):
    columns = _parse_columns(args.columns)
    treatment = parse_summary_file(args.treatment, columns, lenient=args.lenient)
    ou_exposure = parse_summary_file(args.outcome_exposure, columns, lenient=args.lenient)
    outcome_path = getattr(args, "outcome", None)
    if outcome_path is not None:
        ou_outcome = parse_summary_file(outcome_path, columns, lenient=args.lenient)
    else:
        # Heterogeneity testing needs only the two exposure files; reuse the
        # outcome-cohort exposure records to fill the unused outcome slot.
        ou_outcome = ou_exposure
    return harmonize(treatment, ou_exposure, ou_outcome, policy=args.palindromic)


def cmd_analyze(args) -> int:
    methods = _parse_methods(args.methods)
    triples, report = _load_inputs(args)
    boot = BootstrapConfig(
        n_boot=args.boot,
        seed=args.seed,
        ci_kind=CiKind.PERCENTILE if args.ci_kind == "percentile" else CiKind.NORMAL_APPROX,
        level=args.level,
    )
    het = het_test(triples)
    estimates = [estimate(m, triples, boot) for m in methods]
    doc = _round_doc(
        {
            "het_test": het.to_json_dict(),
            "harmonization": report.to_json_dict(),
            "estimates": [e.to_json_dict() for e in estimates],
        }
    )
    _emit(doc, _analyze_tsv(doc), args)
    return 0


def _analyze_tsv(doc: dict) -> str:
    lines = []
    het = doc["het_test"]
    lines.append(
        "# het_test\tstatistic=%s\tdf=%s\tp_value=%s"
        % (_fmt_cell(het["statistic"]), het["df"], _fmt_cell(het["p_value"]))
    )
    harm = doc["harmonization"]
    lines.append("# harmonization\t" + "\t".join(f"{k}={v}" for k, v in harm.items()))
    lines.append("method\tbeta\tse\tci_low\tci_high\tlevel\tn_snps")
    for e in doc["estimates"]:
        ci = e["ci"] or [None, None]
        lines.append(
            "\t".join(
                [
                    e["method"],
                    _fmt_cell(e["beta"]),
                    _fmt_cell(e["se"]),
                    _fmt_cell(ci[0]),
                    _fmt_cell(ci[1]),
                    _fmt_cell(e["level"]),
                    str(e["n_snps"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def cmd_het_test(args) -> int:
    triples, _report = _load_inputs(args)
    het = het_test(triples)
    doc = _round_doc({"het_test": het.to_json_dict()})
    h = doc["het_test"]
    tsv = (
        "statistic\t%s\ndf\t%s\np_value\t%s\nper_snp\t%s\n"
        % (
            _fmt_cell(h["statistic"]),
            h["df"],
            _fmt_cell(h["p_value"]),
            ",".join(_fmt_cell(v) for v in h["per_snp"]),
        )
    )
    _emit(doc, tsv, args)
    return 0


def _scenario_config(args) -> ScenarioConfig:
    base: dict = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except FileNotFoundError:
            raise DataError(f"config file not found: {args.config}", path=args.config) from None
        except json.JSONDecodeError as exc:
            raise DataError(f"config file is not valid JSON: {exc}", path=args.config) from None
        if not isinstance(base, dict):
            raise DataError("config file must contain a JSON object")
    if args.scenario is not None:
        base["pleiotropy"] = _SCENARIOS[args.scenario].to_json_dict()
        if args.n is None and "n" not in base and args.scenario in _SCENARIO_DEFAULT_N:
            base["n"] = _SCENARIO_DEFAULT_N[args.scenario]
    if args.g is not None:
        base["g"] = _parse_g(args.g).to_json_dict()
    for key, value in (
        ("n_replicates", args.replicates),
        ("seed", args.seed),
        ("p", args.p),
        ("n", args.n),
        ("beta0", args.beta0),
        ("maf", args.maf),
    ):
        if value is not None:
            base[key] = value
    try:
        return ScenarioConfig.from_json_dict(base)
    except (ValueError, TypeError, KeyError) as exc:
        raise DataError(f"bad scenario config: {exc}") from None


def cmd_simulate(args) -> int:
    cfg = _scenario_config(args)
    methods = _parse_methods(args.methods)
    boot = BootstrapConfig(
        n_boot=args.boot,
        seed=cfg.seed if args.boot_seed is None else args.boot_seed,
        ci_kind=CiKind.NORMAL_APPROX,
        level=args.level,
    )
    summary = run_scenario(cfg, methods, boot)
    doc = _round_doc({"config": cfg.to_json_dict(), "summary": summary.to_json_dict()})
    _emit(doc, _summary_tsv(doc["summary"]), args)
    return 0


def _summary_tsv(summary: dict) -> str:
    names = list(summary["methods"])
    lines = ["metric\t" + "\t".join(names)]
    for metric in ("bias_pct", "rmse_pct", "ci_length_pct", "coverage_pct",
                   "n_replicates_used", "n_failed"):
        row = [metric] + [_fmt_cell(summary["methods"][n][metric]) for n in names]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _add_io_flags(sub, with_outcome: bool) -> None:
    sub.add_argument("--treatment", required=True, help="treatment-cohort exposure TSV")
    sub.add_argument("--outcome-exposure", required=True, help="outcome-cohort exposure TSV")
    if with_outcome:
        sub.add_argument("--outcome", required=True, help="outcome-cohort outcome TSV")
    else:
        sub.add_argument("--outcome", help="outcome-cohort outcome TSV (optional here)")
    sub.add_argument("--columns", help="column mapping overrides, e.g. snp=rsid,beta=b")
    sub.add_argument("--palindromic", choices=("drop", "keep"), default="drop",
                     help="policy for strand-ambiguous A/T and C/G SNPs")
    sub.add_argument("--lenient", action="store_true",
                     help="count and drop malformed rows instead of failing")


def _add_output_flags(sub) -> None:
    sub.add_argument("--output", help="output path (default stdout)")
    sub.add_argument("--output-format", choices=("json", "tsv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrhetero",
        description="Two-sample Mendelian randomization robust to population heterogeneity.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    a = subs.add_parser("analyze", help="harmonize three summary files and estimate the causal effect")
    _add_io_flags(a, with_outcome=True)
    a.add_argument("--methods", default="MrWald,MrWaldR",
                   help="comma-separated estimators (MrWald, MrWaldR, MrWaldD, Ivw, Divw, Egger, WeightedMedian)")
    a.add_argument("--boot", type=int, default=1000, help="bootstrap replicate count")
    a.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    a.add_argument("--level", type=float, default=0.95, help="confidence level")
    a.add_argument("--ci-kind", choices=("normal", "percentile"), default="normal")
    _add_output_flags(a)
    a.set_defaults(func=cmd_analyze)

    h = subs.add_parser("het-test", help="test homogeneity of the two exposure-association vectors")
    _add_io_flags(h, with_outcome=False)
    _add_output_flags(h)
    h.set_defaults(func=cmd_het_test)

    s = subs.add_parser("simulate", help="run a benchmark scenario and aggregate estimator performance")
    s.add_argument("--config", help="scenario config JSON file")
    s.add_argument("--scenario", choices=tuple(_SCENARIOS),
                   help="pleiotropy shorthand: i none, ii balanced, iii single-SNP, iv five-SNP, v directional")
    s.add_argument("--g", help="heterogeneity map: identity, shift, sine, or table:<path>")
    s.add_argument("--replicates", type=int, help="number of Monte-Carlo replicates")
    s.add_argument("--seed", type=int, help="scenario seed")
    s.add_argument("--p", type=int, help="number of SNPs")
    s.add_argument("--n", type=int, help="cohort sample size")
    s.add_argument("--beta0", type=float, help="true causal effect")
    s.add_argument("--maf", type=float, help="minor allele frequency")
    s.add_argument("--methods", default="MrWald", help="comma-separated estimators")
    s.add_argument("--boot", type=int, default=500, help="bootstrap replicate count")
    s.add_argument("--boot-seed", type=int, help="bootstrap seed (defaults to the scenario seed)")
    s.add_argument("--level", type=float, default=0.95, help="confidence level")
    _add_output_flags(s)
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        _error_record(exc)
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": "FileNotFound", "path": str(exc.filename)}), file=sys.stderr)
        return 2
    except MrHeteroError as exc:
        _error_record(exc)
        return 1
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def _error_record(exc: MrHeteroError) -> None:
    record = {"error": type(exc).__name__, **exc.details}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
