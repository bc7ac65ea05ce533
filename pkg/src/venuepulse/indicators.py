"""Scale, influence and prestige indicators for a venue."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import (
    Corpus,
    PaperRecord,
    UnknownVenue,
    VenuePulseError,
    VenueYearAggregate,
    citation_vector,
    venue_aggregates,
)
from . import elasticity


class EmptyVenue(VenuePulseError, ValueError):
    pass


class InsufficientYears(VenuePulseError, ValueError):
    pass


class ZeroCitationMass(VenuePulseError, ValueError):
    pass


class UnknownIndicator(VenuePulseError, ValueError):
    pass


ABSOLUTE_ONLY = "absolute_only"
DUAL = "dual"
TRAJECTORY_INDICATORS = ("ac", "mc", "hcr", "zcr", "gini", "mii")


# --- scale -----------------------------------------------------------------


@dataclass(frozen=True)
class ScaleIndicators:
    pc: int
    apgr: float | None
    acgr: float | None
    skipped_years: tuple[int, ...] = ()


def mean_yoy_growth(series: Sequence[tuple[int, float]]) -> tuple[float | None, list[int]]:
    """Arithmetic mean of year-over-year percentage changes.

    Zero-valued years (biennial gaps) are dropped and growth is taken between
    consecutive non-zero years. Returns the mean (None when fewer than two
    non-zero years remain) and the dropped years.
    """
    skipped = [y for y, v in series if v <= 0]
    kept = [v for _, v in series if v > 0]
    if len(kept) < 2:
        return None, skipped
    changes = [100.0 * (b / a - 1.0) for a, b in zip(kept, kept[1:])]
    return statistics.fmean(changes), skipped


def scale_indicators(per_year: Sequence[VenueYearAggregate]) -> ScaleIndicators:
    if len(per_year) < 2:
        raise InsufficientYears(f"need at least 2 years, got {len(per_year)}")
    ordered = sorted(per_year, key=lambda a: a.year)
    apgr, skipped_n = mean_yoy_growth([(a.year, a.n_t) for a in ordered])
    acgr, skipped_c = mean_yoy_growth([(a.year, a.c_t) for a in ordered])
    return ScaleIndicators(
        pc=sum(a.n_t for a in ordered),
        apgr=apgr,
        acgr=acgr,
        skipped_years=tuple(sorted(set(skipped_n) | set(skipped_c))),
    )


# --- influence ---------------------------------------------------------------


def h_index(citations: Sequence[int]) -> int:
    """Largest h such that at least h papers have h or more citations."""
    ordered = sorted(citations, reverse=True)
    h = 0
    for i, c in enumerate(ordered, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def norm_h(h: int, pc: int) -> float:
    """H-index per 100 accepted papers."""
    if pc <= 0:
        raise EmptyVenue("norm_h needs a positive publication count")
    return 100.0 * h / pc


@dataclass(frozen=True)
class CentralTail:
    ac: float
    mc: float
    hcr: float
    zcr: float


def central_and_tail(citations: Sequence[int], hcr_threshold: int = 100) -> CentralTail:
    """Mean, median, share above ``hcr_threshold`` (strict) and share at zero."""
    if not citations:
        raise EmptyVenue("empty citation vector")
    n = len(citations)
    return CentralTail(
        ac=sum(citations) / n,
        mc=float(statistics.median(citations)),
        hcr=100.0 * sum(1 for c in citations if c > hcr_threshold) / n,
        zcr=100.0 * sum(1 for c in citations if c == 0) / n,
    )


def upper_quantile(reference: Sequence[float], rel_quantile: float) -> float:
    """The (1 - rel_quantile) quantile of ``reference`` (linear interpolation)."""
    return float(np.quantile(np.asarray(reference, dtype=float), 1.0 - rel_quantile))


def milestone_index(
    citations: Sequence[int],
    abs_threshold: int = 1000,
    rel_quantile: float = 0.001,
    mode: str = ABSOLUTE_ONLY,
    reference: Sequence[int] | None = None,
) -> tuple[float, int]:
    """Share (percent) and count of milestone papers.

    ``absolute_only`` counts papers at or above ``abs_threshold``. ``dual``
    also requires each paper to reach the top ``rel_quantile`` of
    ``reference`` (defaults to ``citations`` itself).
    """
    if not citations:
        raise EmptyVenue("empty citation vector")
    if mode == ABSOLUTE_ONLY:
        count = sum(1 for c in citations if c >= abs_threshold)
    elif mode == DUAL:
        cut = upper_quantile(reference if reference is not None and len(reference) else citations, rel_quantile)
        count = sum(1 for c in citations if c >= abs_threshold and c >= cut)
    else:
        raise ValueError(f"unknown milestone mode {mode!r}")
    return 100.0 * count / len(citations), count


def gini(citations: Sequence[float]) -> float:
    """Gini coefficient of a citation distribution; 0 for an all-zero vector."""
    if not citations:
        raise EmptyVenue("empty citation vector")
    c = sorted(citations)
    n = len(c)
    total = sum(c)
    if total == 0:
        return 0.0
    # Normalized by n * sum(c) = n^2 * mean, which bounds the value to [0, 1).
    weighted = sum((2 * i - n - 1) * v for i, v in enumerate(c, start=1))
    return weighted / (n * total)


# --- prestige ----------------------------------------------------------------


@dataclass
class TopVenueRegistry:
    """Top-tier conferences and journals with alias resolution."""

    top_conferences: dict[str, list[str]] = field(default_factory=dict)
    top_journals: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._lookup: dict[str, tuple[str, str]] = {}
        for kind, table in (("conference", self.top_conferences), ("journal", self.top_journals)):
            for canonical, aliases in table.items():
                for name in [canonical, *aliases]:
                    k = self._norm(name)
                    if k in self._lookup and self._lookup[k] != (kind, canonical):
                        raise ValueError(f"alias {name!r} maps to both {self._lookup[k][1]!r} and {canonical!r}")
                    self._lookup[k] = (kind, canonical)

    @staticmethod
    def _norm(name: str) -> str:
        return " ".join(name.lower().split())

    @classmethod
    def load(cls, path: str | Path | None = None) -> "TopVenueRegistry":
        if path is None:
            text = resources.files("venuepulse").joinpath("data/registry.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        data = json.loads(text)

        def table(value) -> dict[str, list[str]]:
            if isinstance(value, list):
                return {str(v): [] for v in value}
            return {str(k): [str(a) for a in v] for k, v in value.items()}

        return cls(table(data.get("top_conferences", {})), table(data.get("top_journals", {})))

    def canonical(self, name: str) -> str | None:
        hit = self._lookup.get(self._norm(name))
        return hit[1] if hit else None

    def is_top_conference(self, name: str) -> bool:
        hit = self._lookup.get(self._norm(name))
        return bool(hit) and hit[0] == "conference"

    def is_top_journal(self, name: str) -> bool:
        hit = self._lookup.get(self._norm(name))
        return bool(hit) and hit[0] == "journal"

    def count_top_citations(self, citing_venues: Iterable[str]) -> tuple[int, int]:
        """(top-conference, top-journal) citation counts for a list of citing venue strings."""
        conf = journal = 0
        for v in citing_venues:
            if self.is_top_conference(v):
                conf += 1
            elif self.is_top_journal(v):
                journal += 1
        return conf, journal


@dataclass(frozen=True)
class Prestige:
    tcs: float
    tjs: float
    tcc: float


def prestige(records: Sequence[PaperRecord], registry: TopVenueRegistry | None = None) -> Prestige:
    """Top-conference share, top-journal share and top-conference coverage.

    The registry is not consulted here: ``top_conf_citations`` and
    ``top_journal_citations`` arrive precomputed on each record.
    """
    if not records:
        raise EmptyVenue("no records")
    mass = sum(r.citation_count for r in records)
    if mass == 0:
        raise ZeroCitationMass("venue has no citations; TCS/TJS undefined")
    return Prestige(
        tcs=100.0 * sum(r.top_conf_citations for r in records) / mass,
        tjs=100.0 * sum(r.top_journal_citations for r in records) / mass,
        tcc=100.0 * sum(1 for r in records if r.top_conf_citations >= 1) / len(records),
    )


# --- longitudinal --------------------------------------------------------------

SINGLE_YEAR = "single_year"
COHORT = "cumulative"


def _pooled_reference(corpus: Corpus, year: int, window_mode: str) -> list[int]:
    out: list[int] = []
    for venue in corpus.venues:
        out.extend(_year_vector(corpus, venue, year, window_mode))
    return out


def _year_vector(corpus: Corpus, venue: str, year: int, window_mode: str) -> list[int]:
    if window_mode == SINGLE_YEAR:
        return citation_vector(corpus, venue, year)
    if window_mode == COHORT:
        return sorted(r.citation_count for r in corpus.venue_index[venue].get(year, ()))
    raise ValueError(f"unknown window mode {window_mode!r}")


def trajectory(
    corpus: Corpus,
    venue: str,
    indicator: str,
    window_mode: str = SINGLE_YEAR,
    hcr_threshold: int = 100,
    mii_threshold: int = 1000,
    mii_mode: str = ABSOLUTE_ONLY,
    rel_quantile: float = 0.001,
) -> list[tuple[int, float]]:
    """Per-year indicator values over each year's citation vector.

    ``single_year`` uses citations received in year t by papers published in
    t; ``cumulative`` uses total counts of the year-t cohort. Years without
    papers are omitted.
    """
    if indicator not in TRAJECTORY_INDICATORS:
        raise UnknownIndicator(f"{indicator!r}; expected one of {', '.join(TRAJECTORY_INDICATORS)}")
    if venue not in corpus.venue_index:
        raise UnknownVenue(venue)
    series: list[tuple[int, float]] = []
    for year in corpus.years:
        vec = _year_vector(corpus, venue, year, window_mode)
        if not vec:
            continue
        if indicator == "gini":
            value = gini(vec)
        elif indicator == "mii":
            ref = _pooled_reference(corpus, year, window_mode) if mii_mode == DUAL else None
            value = milestone_index(vec, mii_threshold, rel_quantile, mii_mode, ref)[0]
        else:
            value = getattr(central_and_tail(vec, hcr_threshold), indicator)
        series.append((year, value))
    return series


# --- full report -----------------------------------------------------------------

POOLED = "pooled"
COHORT_MEAN = "cohort_mean"

REPORT_COLUMNS = (
    ("PC", "pc"),
    ("APGR", "apgr"),
    ("ACGR", "acgr"),
    ("AC", "ac"),
    ("MC", "mc"),
    ("HCR", "hcr"),
    ("ZCR", "zcr"),
    ("H", "h_index"),
    ("Norm-H", "norm_h"),
    ("MII", "mii"),
    ("TCS", "tcs"),
    ("TJS", "tjs"),
    ("TCC", "tcc"),
    ("QQE", "qqe"),
)


@dataclass
class IndicatorReport:
    venue: str
    pc: int
    apgr: float | None
    acgr: float | None
    ac: float
    mc: float
    hcr: float
    zcr: float
    h_index: int
    norm_h: float
    mii: float
    gini: float
    tcs: float | None
    tjs: float | None
    tcc: float
    qqe: float | None
    milestone_count: int = 0
    trajectories: dict[str, list[tuple[int, float]]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def _milestones(corpus: Corpus, venue: str, records: Sequence[PaperRecord], threshold: int, mode: str, rel_quantile: float):
    vec = sorted(r.citation_count for r in records)
    if mode == ABSOLUTE_ONLY:
        return milestone_index(vec, threshold, rel_quantile, mode)
    # Dual: each publication-year cohort is held against the pooled all-venue cohort of that year.
    count = 0
    for year, cohort in corpus.venue_index[venue].items():
        ref = _pooled_reference(corpus, year, COHORT)
        count += milestone_index(sorted(r.citation_count for r in cohort), threshold, rel_quantile, DUAL, ref)[1]
    return 100.0 * count / len(vec), count


def venue_report(
    corpus: Corpus,
    venue: str,
    registry: TopVenueRegistry | None = None,
    hcr_threshold: int = 100,
    mii_threshold: int = 1000,
    mii_mode: str = ABSOLUTE_ONLY,
    rel_quantile: float = 0.001,
    unit_band: float = 0.01,
    central_mode: str = POOLED,
    with_trajectories: bool = False,
) -> IndicatorReport:
    """All fourteen indicators for one venue.

    AC/MC/HCR/ZCR pool every paper's cumulative count by default;
    ``central_mode="cohort_mean"`` averages the per-publication-year values
    instead. QQE is the mean of the defined annual magnitudes.
    """
    records = corpus.venue_records(venue)
    if not records:
        raise EmptyVenue(venue)
    warnings: list[str] = []
    aggregates = venue_aggregates(corpus, venue)
    scale = scale_indicators(aggregates)
    if scale.skipped_years:
        warnings.append(f"{venue}: zero-count years dropped from growth rates: {list(scale.skipped_years)}")

    vec = citation_vector(corpus, venue)
    if central_mode == POOLED:
        central = central_and_tail(vec, hcr_threshold)
    elif central_mode == COHORT_MEAN:
        per_year = [
            central_and_tail(_year_vector(corpus, venue, y, COHORT), hcr_threshold)
            for y in corpus.venue_index[venue]
        ]
        central = CentralTail(*(statistics.fmean(getattr(c, f) for c in per_year) for f in ("ac", "mc", "hcr", "zcr")))
    else:
        raise ValueError(f"unknown central mode {central_mode!r}")

    h = h_index(vec)
    mii, milestone_count = _milestones(corpus, venue, records, mii_threshold, mii_mode, rel_quantile)
    try:
        pres = prestige(records, registry)
        tcs, tjs, tcc = pres.tcs, pres.tjs, pres.tcc
    except ZeroCitationMass:
        warnings.append(f"{venue}: zero citation mass, TCS/TJS undefined")
        tcs = tjs = None
        tcc = 100.0 * sum(1 for r in records if r.top_conf_citations >= 1) / len(records)

    points = elasticity.qqe_series(venue, [(a.year, a.n_t, a.c_t) for a in aggregates], unit_band)
    mags = [p.qqe_magnitude for p in points if p.qqe_magnitude is not None]
    undefined = [p.year for p in points if p.qqe_magnitude is None]
    if undefined:
        warnings.append(f"{venue}: QQE undefined in {undefined}")

    report = IndicatorReport(
        venue=venue,
        pc=scale.pc,
        apgr=scale.apgr,
        acgr=scale.acgr,
        ac=central.ac,
        mc=central.mc,
        hcr=central.hcr,
        zcr=central.zcr,
        h_index=h,
        norm_h=norm_h(h, scale.pc),
        mii=mii,
        gini=gini(vec),
        tcs=tcs,
        tjs=tjs,
        tcc=tcc,
        qqe=statistics.fmean(mags) if mags else None,
        milestone_count=milestone_count,
        warnings=warnings,
    )
    if with_trajectories:
        for ind in TRAJECTORY_INDICATORS:
            report.trajectories[ind] = trajectory(
                corpus, venue, ind, SINGLE_YEAR, hcr_threshold, mii_threshold, mii_mode, rel_quantile
            )
        report.trajectories["qqe"] = [(p.year, p.qqe_signed) for p in points if p.qqe_signed is not None]
    return report


def is_finite(x: float | None) -> bool:
    return x is not None and math.isfinite(x)
