"""Quality-quantity elasticity (QQE): annual points, regimes and trajectories."""

from __future__ import annotations

import csv
import enum
import io
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, UnknownVenue, VenuePulseError, citation_mass, venue_aggregates
from .formatting import fmt


class UndefinedPoint(VenuePulseError, ValueError):
    pass


class UnknownCategory(VenuePulseError, KeyError):
    def __str__(self) -> str:
        return f"unknown category: {self.args[0]!r}"


class Regime(str, enum.Enum):
    EFFICIENT_EXPANSION = "EfficientExpansion"
    QUALITY_CONCENTRATING_CONTRACTION = "QualityConcentratingContraction"
    UNITARY = "Unitary"
    IMPACT_DILUTION = "ImpactDilution"
    MALIGNANT_CONTRACTION = "MalignantContraction"
    UNDEFINED = "Undefined"


DEFAULT_UNIT_BAND = 0.01


@dataclass(frozen=True)
class QqePoint:
    label: str
    year: int
    n_t: int
    c_t: int
    p_t: float | None  # N_t / N_{t-1}
    g_t: float | None  # C_t / C_{t-1}
    s_t: float | None  # ln(p_t)
    qqe_magnitude: float | None
    qqe_signed: float | None
    regime: Regime = Regime.UNDEFINED

    @property
    def defined(self) -> bool:
        return self.qqe_magnitude is not None


def classify_regime(point: QqePoint, unit_band: float = DEFAULT_UNIT_BAND) -> Regime:
    """Elasticity regime from QQE magnitude and the sign of log scale growth.

    A zero log growth (p_t == 1) counts as expansion, consistent with the
    signed convention where p_t >= 1 reports a positive QQE.
    """
    if point.qqe_magnitude is None:
        raise UndefinedPoint(f"{point.label} {point.year}: QQE undefined")
    m = point.qqe_magnitude
    expanding = point.p_t is not None and point.p_t >= 1.0
    if abs(m - 1.0) <= unit_band:
        return Regime.UNITARY
    if m > 1.0:
        return Regime.EFFICIENT_EXPANSION if expanding else Regime.QUALITY_CONCENTRATING_CONTRACTION
    return Regime.IMPACT_DILUTION if expanding else Regime.MALIGNANT_CONTRACTION


def qqe_point(
    n_t: int,
    n_prev: int,
    c_t: int,
    c_prev: int,
    label: str = "",
    year: int = 0,
    unit_band: float = DEFAULT_UNIT_BAND,
) -> QqePoint:
    """One annual QQE point.

    Each ratio is kept whenever its own denominator is positive (a gap year
    still reports p_t = 0 and g_t); the QQE itself needs N_t, N_{t-1} and
    C_{t-1} all positive. The signed value is negated on contraction years.
    """
    if min(n_t, n_prev, c_t, c_prev) < 0:
        raise ValueError("counts must be non-negative")
    p_t = n_t / n_prev if n_prev > 0 else None
    g_t = c_t / c_prev if c_prev > 0 else None
    s_t = math.log(p_t) if p_t else None
    magnitude = signed = None
    regime = Regime.UNDEFINED
    if n_t > 0 and n_prev > 0 and c_prev > 0:
        magnitude = g_t / p_t
        signed = magnitude if p_t >= 1.0 else -magnitude
    point = QqePoint(label, year, n_t, c_t, p_t, g_t, s_t, magnitude, signed)
    if magnitude is not None:
        regime = classify_regime(point, unit_band)
        point = QqePoint(label, year, n_t, c_t, p_t, g_t, s_t, magnitude, signed, regime)
    return point


def qqe_series(label: str, series: Sequence[tuple[int, int, int]], unit_band: float = DEFAULT_UNIT_BAND) -> list[QqePoint]:
    """Points for every year after the first of a (year, N_t, C_t) series."""
    ordered = sorted(series)
    return [
        qqe_point(n, n0, c, c0, label, y, unit_band)
        for (_, n0, c0), (y, n, c) in zip(ordered, ordered[1:])
    ]


def qqe_trajectory(corpus: Corpus, venue: str, unit_band: float = DEFAULT_UNIT_BAND) -> list[QqePoint]:
    from .indicators import InsufficientYears

    if venue not in corpus.venue_index:
        raise UnknownVenue(venue)
    if len(corpus.years) < 2:
        raise InsufficientYears(f"{venue}: need at least 2 years in the window")
    aggs = venue_aggregates(corpus, venue)
    return qqe_series(venue, [(a.year, a.n_t, a.c_t) for a in aggs], unit_band)


POOLED = "pooled"
VENUE_MEAN = "venue_mean"


def category_series(corpus: Corpus, category: str, venue: str | None = None) -> list[tuple[int, int, int]]:
    """(year, N_t, C_t) for one category, pooled across venues unless ``venue`` is given."""
    recs = [
        r for r in corpus.records
        if r.ai_category == category and (venue is None or r.venue == venue)
    ]
    return [(y, sum(1 for r in recs if r.year == y), citation_mass(recs, y)) for y in corpus.years]


def field_qqe(corpus: Corpus, category: str, mode: str = POOLED) -> list[tuple[int, float | None]]:
    """Annual QQE magnitude for a research category.

    ``pooled`` builds N_t and C_t over every venue's papers in the category;
    ``venue_mean`` averages the per-venue magnitudes that are defined.
    """
    from .indicators import InsufficientYears

    if category not in corpus.categories:
        raise UnknownCategory(category)
    if len(corpus.years) < 2:
        raise InsufficientYears("need at least 2 years in the window")
    if mode == POOLED:
        return [(p.year, p.qqe_magnitude) for p in qqe_series(category, category_series(corpus, category))]
    if mode == VENUE_MEAN:
        per_year: dict[int, list[float]] = {y: [] for y in list(corpus.years)[1:]}
        for venue in corpus.venues:
            for p in qqe_series(category, category_series(corpus, category, venue)):
                if p.qqe_magnitude is not None:
                    per_year[p.year].append(p.qqe_magnitude)
        return [(y, statistics.fmean(v) if v else None) for y, v in per_year.items()]
    raise ValueError(f"unknown field QQE mode {mode!r}")


# --- trajectory table -----------------------------------------

TABLE_COLUMNS = ("Conference", "Year", "N_t", "C_t", "P_t", "g_t", "QQE", "ln(P_t)")
VALUE_COLUMNS = ("P_t", "g_t", "QQE", "ln(P_t)")
UNDEFINED_CELL = "-"
DEFAULT_FLAGGED = frozenset({("ACL", 2021)})


@dataclass(frozen=True)
class TableRow:
    conference: str
    year: int
    n_t: int
    c_t: int
    values: dict  # column -> float | None

    @classmethod
    def from_point(cls, point: QqePoint | None, label: str, year: int, n_t: int, c_t: int) -> "TableRow":
        if point is None:
            vals = dict.fromkeys(VALUE_COLUMNS)
        else:
            vals = {"P_t": point.p_t, "g_t": point.g_t, "QQE": point.qqe_signed, "ln(P_t)": point.s_t}
            if point.qqe_signed is None:
                # ln(P_t) is left blank whenever QQE is blank, matching the reference table.
                vals["ln(P_t)"] = None
        return cls(label, year, n_t, c_t, vals)


def table_rows(label: str, series: Sequence[tuple[int, int, int]], unit_band: float = DEFAULT_UNIT_BAND) -> list[TableRow]:
    ordered = sorted(series)
    if not ordered:
        return []
    points = {p.year: p for p in qqe_series(label, ordered, unit_band)}
    return [TableRow.from_point(points.get(y), label, y, n, c) for y, n, c in ordered]


def write_table(rows: Iterable[TableRow], fh, digits: int = 3) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow(
            [r.conference, r.year, r.n_t, r.c_t]
            + [UNDEFINED_CELL if r.values[c] is None else fmt(r.values[c], digits) for c in VALUE_COLUMNS]
        )


def table_to_string(rows: Iterable[TableRow], digits: int = 3) -> str:
    buf = io.StringIO()
    write_table(rows, buf, digits)
    return buf.getvalue()


def read_table(path: str | Path) -> list[TableRow]:
    """Read a trajectory table in the standard column layout."""
    out: list[TableRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in TABLE_COLUMNS[:4] if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for row in reader:
            vals = {}
            for c in VALUE_COLUMNS:
                cell = (row.get(c) or "").strip()
                vals[c] = None if cell in ("", UNDEFINED_CELL) else float(cell)
            out.append(TableRow(row["Conference"].strip(), int(row["Year"]), int(row["N_t"]), int(row["C_t"]), vals))
    return out


def series_from_table(rows: Iterable[TableRow]) -> dict[str, list[tuple[int, int, int]]]:
    """Group table rows back into per-conference (year, N_t, C_t) series."""
    out: dict[str, list[tuple[int, int, int]]] = {}
    for r in rows:
        out.setdefault(r.conference, []).append((r.year, r.n_t, r.c_t))
    return out


@dataclass
class GoldenDiff:
    max_abs: dict[str, float] = field(default_factory=lambda: dict.fromkeys(VALUE_COLUMNS, 0.0))
    failures: list[tuple[str, int, str, float | None, float | None]] = field(default_factory=list)
    skipped: list[tuple[str, int]] = field(default_factory=list)
    missing: list[tuple[str, int]] = field(default_factory=list)
    compared: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures and not self.missing

    def report(self, tolerance: float) -> str:
        lines = [f"compared rows: {self.compared}", f"tolerance: {tolerance}"]
        lines += [f"max |diff| {c}: {self.max_abs[c]:.6f}" for c in VALUE_COLUMNS]
        lines += [f"flagged (excluded): {c} {y}" for c, y in self.skipped]
        lines += [f"missing row: {c} {y}" for c, y in self.missing]
        for conf, year, col, got, want in self.failures:
            lines.append(f"DEVIATION {conf} {year} {col}: computed={got} golden={want}")
        return "\n".join(lines) + "\n"


def diff_golden(
    computed: Iterable[TableRow],
    golden: Iterable[TableRow],
    tolerance: float = 0.005,
    flagged: Iterable[tuple[str, int]] = DEFAULT_FLAGGED,
) -> GoldenDiff:
    """Compare computed rows with a golden table cell by cell.

    A cell fails when one side is undefined and the other is not, or when
    both are defined and differ by more than ``tolerance``.
    """
    flagged = set(flagged)
    mine = {(r.conference, r.year): r for r in computed}
    result = GoldenDiff()
    for g in golden:
        key = (g.conference, g.year)
        if key in flagged:
            result.skipped.append(key)
            continue
        r = mine.get(key)
        if r is None:
            result.missing.append(key)
            continue
        result.compared += 1
        for c in VALUE_COLUMNS:
            got, want = r.values[c], g.values[c]
            if got is None and want is None:
                continue
            if got is None or want is None:
                result.failures.append((g.conference, g.year, c, got, want))
                continue
            d = abs(got - want)
            result.max_abs[c] = max(result.max_abs[c], d)
            if d > tolerance + 1e-12:
                result.failures.append((g.conference, g.year, c, got, want))
    return result
