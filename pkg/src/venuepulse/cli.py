"""Command-line entry point: ``venuepulse summary|qqe|correlate|plotdata|ingest``.

Exit codes: 0 success, 2 input schema error, 3 usage or selection error,
4 golden-file deviation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import elasticity, indicators
from .corpus import DEFAULT_WINDOW, Corpus, RecordValidationError, citation_vector, venue_aggregates
from .formatting import fmt
from .ingest import (
    IoFailure,
    SchemaViolation,
    SourceClient,
    persist_corpus,
    read_proceedings,
    run_ingest,
    source_configs,
)
from .ingest.store import load_corpus
from .stats import DegenerateInput, spearman

log = logging.getLogger("venuepulse")

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_USAGE = 3
EXIT_GOLDEN = 4

QQE_NOTE = "QQE column: mean of the defined annual QQE magnitudes over the window"
PLOT_INDICATORS = indicators.TRAJECTORY_INDICATORS + ("qqe",)
PERCENTILES = (5, 25, 50, 75, 95)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    corpus_path: str | None = None
    registry_path: str | None = None
    window: tuple[int, int] = DEFAULT_WINDOW
    venues: list[str] = field(default_factory=list)
    hcr_threshold: int = 100
    mii_threshold: int = 1000
    mii_mode: str = indicators.ABSOLUTE_ONLY
    rel_quantile: float = 0.001
    unit_band: float = elasticity.DEFAULT_UNIT_BAND
    median_rule: str = "mean-of-middles"
    central_mode: str = indicators.POOLED
    output_dir: str = "out"
    output_formats: list[str] = field(default_factory=lambda: ["csv"])
    sources: list[dict[str, Any]] = field(default_factory=list)
    workers: int = 1

    def validate(self) -> None:
        a, b = self.window
        if not a < b:
            raise UsageError(f"window start must precede end, got {a}:{b}")
        if self.hcr_threshold <= 0 or self.mii_threshold <= 0:
            raise UsageError("thresholds must be positive")
        if self.unit_band <= 0:
            raise UsageError("unit_band must be positive")
        if self.mii_mode not in (indicators.ABSOLUTE_ONLY, indicators.DUAL):
            raise UsageError(f"unknown mii_mode {self.mii_mode!r}")
        if self.central_mode not in (indicators.POOLED, indicators.COHORT_MEAN):
            raise UsageError(f"unknown central_mode {self.central_mode!r}")
        if self.median_rule != "mean-of-middles":
            raise UsageError(f"unsupported median_rule {self.median_rule!r}")
        bad = set(self.output_formats) - {"csv", "json"}
        if bad or not self.output_formats:
            raise UsageError(f"output formats must be csv and/or json, got {self.output_formats}")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "window" in data:
            data["window"] = tuple(int(x) for x in data["window"])
        return cls(**data)


def parse_window(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 2014:2024, got {text!r}") from None


# --- output helpers ------------------------------------------------------------


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_number(value: Any, digits: int) -> Any:
    if value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return float(fmt(value, digits))


def _write_warnings(path: Path, warnings: Sequence[str]) -> None:
    _write(path, "".join(f"{w}\n" for w in warnings))


def _load(cfg: RunConfig) -> Corpus:
    if not cfg.corpus_path:
        raise UsageError("no corpus given (use --corpus or corpus_path in the config)")
    return load_corpus(cfg.corpus_path, window=cfg.window)


def _selected_venues(cfg: RunConfig, corpus: Corpus, warnings: list[str]) -> list[str]:
    wanted = cfg.venues or corpus.venues
    missing = [v for v in wanted if v not in corpus.venue_index]
    for v in missing:
        warnings.append(f"venue {v} has no records in the corpus")
    selected = [v for v in wanted if v in corpus.venue_index]
    if not selected:
        raise UsageError("no venues matched")
    return selected


# --- commands ----------------------------------------------------------------------


def cmd_summary(cfg: RunConfig) -> int:
    corpus = _load(cfg)
    warnings = [QQE_NOTE]
    venues = _selected_venues(cfg, corpus, warnings)
    registry = indicators.TopVenueRegistry.load(cfg.registry_path)
    reports = []
    for venue in venues:
        try:
            reports.append(
                indicators.venue_report(
                    corpus, venue, registry,
                    hcr_threshold=cfg.hcr_threshold,
                    mii_threshold=cfg.mii_threshold,
                    mii_mode=cfg.mii_mode,
                    rel_quantile=cfg.rel_quantile,
                    unit_band=cfg.unit_band,
                    central_mode=cfg.central_mode,
                )
            )
        except indicators.InsufficientYears as exc:
            warnings.append(f"{venue}: skipped ({exc})")
    for r in reports:
        warnings.extend(r.warnings)

    out = _out_dir(cfg)
    header = ["Conference"] + [name for name, _ in indicators.REPORT_COLUMNS]
    if "csv" in cfg.output_formats:
        rows = [[r.venue] + [fmt(getattr(r, attr), 2) for _, attr in indicators.REPORT_COLUMNS] for r in reports]
        _write(out / "summary.csv", _csv_text(header, rows))
    if "json" in cfg.output_formats:
        payload = {
            "conventions": {"qqe": QQE_NOTE, "central_mode": cfg.central_mode, "mii_mode": cfg.mii_mode},
            "rows": [
                {"Conference": r.venue, **{name: _json_number(getattr(r, attr), 2) for name, attr in indicators.REPORT_COLUMNS}}
                for r in reports
            ],
        }
        _write(out / "summary.json", json.dumps(payload, indent=2) + "\n")
    _write_warnings(out / "summary.warnings", warnings)
    return EXIT_OK


def _table_json(rows: Sequence[elasticity.TableRow]) -> str:
    data = [
        {"Conference": r.conference, "Year": r.year, "N_t": r.n_t, "C_t": r.c_t,
         **{c: _json_number(r.values[c], 3) for c in elasticity.VALUE_COLUMNS}}
        for r in rows
    ]
    return json.dumps(data, indent=2) + "\n"


def cmd_qqe(cfg: RunConfig, golden: str | None = None, series: str | None = None,
            tolerance: float = 0.005, flagged: Sequence[tuple[str, int]] | None = None) -> int:
    warnings: list[str] = []
    rows: list[elasticity.TableRow] = []
    if series:
        grouped = elasticity.series_from_table(elasticity.read_table(series))
        wanted = cfg.venues or list(grouped)
        if not any(v in grouped for v in wanted):
            raise UsageError("no venues matched")
        for v in wanted:
            if v in grouped:
                rows.extend(elasticity.table_rows(v, grouped[v], cfg.unit_band))
            else:
                warnings.append(f"venue {v} not in series file")
    else:
        corpus = _load(cfg)
        for v in _selected_venues(cfg, corpus, warnings):
            aggs = venue_aggregates(corpus, v)
            rows.extend(elasticity.table_rows(v, [(a.year, a.n_t, a.c_t) for a in aggs], cfg.unit_band))
    first_year = {}
    for r in rows:
        first_year.setdefault(r.conference, r.year)
        if r.values["QQE"] is None and r.year != first_year[r.conference]:
            warnings.append(f"{r.conference} {r.year}: QQE undefined")

    out = _out_dir(cfg)
    if "csv" in cfg.output_formats:
        _write(out / "qqe.csv", elasticity.table_to_string(rows))
    if "json" in cfg.output_formats:
        _write(out / "qqe.json", _table_json(rows))

    status = EXIT_OK
    if golden:
        flagged = list(elasticity.DEFAULT_FLAGGED) if flagged is None else list(flagged)
        golden_rows = elasticity.read_table(golden)
        if cfg.venues:
            golden_rows = [g for g in golden_rows if g.conference in cfg.venues]
        diff = elasticity.diff_golden(rows, golden_rows, tolerance, flagged)
        text = diff.report(tolerance)
        _write(out / "qqe.golden_diff.txt", text)
        sys.stdout.write(text)
        warnings += [f"flagged anomaly excluded from golden comparison: {c} {y}" for c, y in diff.skipped]
        if not diff.ok:
            status = EXIT_GOLDEN
    _write_warnings(out / "qqe.warnings", warnings)
    return status


def _category_series_file(path: str) -> dict[str, list[tuple[int, float, float]]]:
    out: dict[str, list[tuple[int, float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            q = (row.get("QQE") or "").strip()
            if q in ("", "/", "-"):
                continue
            out.setdefault(row["Category"], []).append((int(row["Year"]), float(row["PaperCount"]), float(q)))
    return out


def cmd_correlate(cfg: RunConfig, by: str = "ai_category", series: str | None = None, alpha: float = 0.05) -> int:
    if by != "ai_category":
        raise UsageError(f"can only correlate by ai_category, not {by!r}")
    warnings: list[str] = []
    if series:
        data = _category_series_file(series)
    else:
        corpus = _load(cfg)
        data = {}
        for cat in corpus.categories:
            counts = {y: n for y, n, _ in elasticity.category_series(corpus, cat)}
            pts = elasticity.field_qqe(corpus, cat)
            data[cat] = [(y, counts[y], q) for y, q in pts if q is not None]
    if not data:
        raise UsageError("no categories found")

    rows = []
    for cat, pts in data.items():
        x = [p[1] for p in pts]
        y = [p[2] for p in pts]
        if len(pts) < 3:
            note = f"skipped: {len(pts)} year points (need 3)"
            warnings.append(f"{cat}: {note}")
            rows.append([cat, len(pts), "", "", "", note])
            continue
        try:
            res = spearman(x, y)
        except DegenerateInput as exc:
            warnings.append(f"{cat}: skipped ({exc})")
            rows.append([cat, len(pts), "", "", "", f"skipped: {exc}"])
            continue
        rows.append([cat, res.n, fmt(res.r, 3), fmt(res.p, 3), "yes" if res.p <= alpha else "no",
                     "tie-adjusted" if res.tie_adjusted else ""])

    out = _out_dir(cfg)
    header = ["Category", "n", "r", "p", "significant", "note"]
    if "csv" in cfg.output_formats:
        _write(out / "correlate.csv", _csv_text(header, rows))
    if "json" in cfg.output_formats:
        payload = [
            {"Category": r[0], "n": r[1], "r": float(r[2]) if r[2] else None, "p": float(r[3]) if r[3] else None,
             "significant": r[4] == "yes", "note": r[5]}
            for r in rows
        ]
        _write(out / "correlate.json", json.dumps(payload, indent=2) + "\n")
    _write_warnings(out / "correlate.warnings", warnings)
    return EXIT_OK


def log_percentiles(values: Sequence[int]) -> list[float]:
    """p5/p25/p50/p75/p95 of log10(1 + c), linear interpolation between order statistics."""
    logged = np.log10(1.0 + np.asarray(values, dtype=float))
    return [float(v) for v in np.percentile(logged, PERCENTILES)]


def _safe_name(venue: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in venue)


def cmd_plotdata(cfg: RunConfig, indicator: str, log_scale: bool = False) -> int:
    if indicator not in PLOT_INDICATORS:
        raise UsageError(f"unknown indicator {indicator!r}; expected one of {', '.join(PLOT_INDICATORS)}")
    corpus = _load(cfg)
    warnings: list[str] = []
    venues = _selected_venues(cfg, corpus, warnings)
    out = _out_dir(cfg) / "plotdata"
    digits = 3 if indicator == "qqe" else 2
    for venue in venues:
        if indicator == "qqe":
            series = [(p.year, p.qqe_signed) for p in elasticity.qqe_trajectory(corpus, venue, cfg.unit_band)
                      if p.qqe_signed is not None]
        else:
            series = indicators.trajectory(
                corpus, venue, indicator, indicators.SINGLE_YEAR,
                cfg.hcr_threshold, cfg.mii_threshold, cfg.mii_mode, cfg.rel_quantile,
            )
        missing = sorted(set(corpus.years) - {y for y, _ in series})
        if missing:
            warnings.append(f"{venue}: {indicator} undefined in {missing}")
        name = _safe_name(venue)
        if "csv" in cfg.output_formats:
            _write(out / indicator / f"{name}.csv", _csv_text(["Year", "Value"], [[y, fmt(v, digits)] for y, v in series]))
        if "json" in cfg.output_formats:
            _write(out / indicator / f"{name}.json",
                   json.dumps([{"Year": y, "Value": _json_number(v, digits)} for y, v in series], indent=2) + "\n")
        if log_scale:
            rows = []
            for y in corpus.years:
                vec = citation_vector(corpus, venue, y)
                if vec:
                    rows.append([y, len(vec)] + [fmt(v, 4) for v in log_percentiles(vec)])
            header = ["Year", "n"] + [f"p{p}" for p in PERCENTILES]
            _write(out / "log_percentiles" / f"{name}.csv", _csv_text(header, rows))
    _write_warnings(out / f"{indicator}.warnings", warnings)
    return EXIT_OK


def cmd_ingest(cfg: RunConfig, titles: str) -> int:
    sources = source_configs({"sources": cfg.sources})
    primaries = [s for s in sources if s.get("priority", "primary") == "primary"]
    if not primaries:
        raise UsageError("no primary source configured")
    supplemental = [s for s in sources if s.get("priority") == "supplemental"]
    registry = indicators.TopVenueRegistry.load(cfg.registry_path)
    corpus, report = run_ingest(
        read_proceedings(titles),
        SourceClient.from_config(primaries[0]),
        SourceClient.from_config(supplemental[0]) if supplemental else None,
        window=cfg.window,
        workers=cfg.workers,
        canonical_venue=registry.canonical,
    )
    out = _out_dir(cfg)
    if "csv" in cfg.output_formats:
        persist_corpus(corpus, out / "corpus.csv")
    if "json" in cfg.output_formats:
        persist_corpus(corpus, out / "corpus.jsonl")
    _write_warnings(out / "ingest.warnings", report.lines())
    sys.stdout.write("\n".join(report.lines()[:5]) + "\n")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 3, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--corpus", help="corpus file (CSV or JSON lines)")
    common.add_argument("--registry", help="top-venue registry JSON")
    common.add_argument("--venue", action="append", dest="venues", metavar="V", help="restrict to venue (repeatable)")
    common.add_argument("--window", type=parse_window, metavar="A:B")
    common.add_argument("--format", action="append", dest="formats", choices=["csv", "json"])
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="venuepulse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("summary", parents=[common], help="per-venue indicator table")
    p.add_argument("--mii-mode", choices=[indicators.ABSOLUTE_ONLY, indicators.DUAL])
    p.add_argument("--central-mode", choices=[indicators.POOLED, indicators.COHORT_MEAN])

    p = sub.add_parser("qqe", parents=[common], help="annual QQE trajectory table")
    p.add_argument("--golden", help="golden table to diff against")
    p.add_argument("--series", help="read N_t/C_t from a trajectory table instead of a corpus")
    p.add_argument("--tolerance", type=float, default=0.005)
    p.add_argument("--flag", action="append", metavar="VENUE:YEAR",
                   help="exclude a golden row (default ACL:2021); repeatable")

    p = sub.add_parser("correlate", parents=[common], help="Spearman r between paper counts and QQE per category")
    p.add_argument("--by", default="ai_category", choices=["ai_category"])
    p.add_argument("--series", help="category table with Category,Year,PaperCount,QQE columns")
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("plotdata", parents=[common], help="per-venue yearly series for plotting")
    p.add_argument("indicator", help=", ".join(PLOT_INDICATORS))
    p.add_argument("--log", action="store_true", help="also export log10(1+c) percentiles per year")

    p = sub.add_parser("ingest", parents=[common], help="fetch and clean a corpus from scholarly APIs")
    p.add_argument("--titles", required=True, help="proceedings title list (CSV: title,venue,year)")
    p.add_argument("--workers", type=int)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.corpus:
        cfg.corpus_path = args.corpus
    if args.registry:
        cfg.registry_path = args.registry
    if args.venues:
        cfg.venues = list(args.venues)
    if args.window:
        cfg.window = args.window
    if args.formats:
        cfg.output_formats = sorted(set(args.formats))
    if args.out:
        cfg.output_dir = args.out
    for opt, attr in (("mii_mode", "mii_mode"), ("central_mode", "central_mode"), ("workers", "workers")):
        if getattr(args, opt, None) is not None:
            setattr(cfg, attr, getattr(args, opt))
    cfg.validate()
    return cfg


def _parse_flags(values: Sequence[str] | None) -> list[tuple[str, int]] | None:
    if values is None:
        return None
    out = []
    for v in values:
        venue, _, year = v.rpartition(":")
        if not venue or not year.isdigit():
            raise UsageError(f"--flag expects VENUE:YEAR, got {v!r}")
        out.append((venue, int(year)))
    return out


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.command == "summary":
            return cmd_summary(cfg)
        if args.command == "qqe":
            return cmd_qqe(cfg, args.golden, args.series, args.tolerance, _parse_flags(args.flag))
        if args.command == "correlate":
            return cmd_correlate(cfg, args.by, args.series, args.alpha)
        if args.command == "plotdata":
            return cmd_plotdata(cfg, args.indicator, args.log)
        if args.command == "ingest":
            return cmd_ingest(cfg, args.titles)
    except (SchemaViolation, RecordValidationError) as exc:
        print(f"venuepulse: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (UsageError, IoFailure, indicators.UnknownIndicator, ValueError, OSError) as exc:
        print(f"venuepulse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
