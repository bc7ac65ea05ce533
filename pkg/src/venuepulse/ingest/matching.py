"""Exact title matching, deduplication and multi-source consolidation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from ..corpus import (
    ANNUAL_PREFIX,
    DEFAULT_WINDOW,
    PaperRecord,
    VenuePulseError,
    normalize_title,
    validate_record,
)

EXACT = "exact_title_venue_year"
UNMATCHED = "unmatched"


class VenueYearMismatch(VenuePulseError, ValueError):
    pass


@dataclass(frozen=True)
class MatchResult:
    proceedings_title: str
    matched: bool
    matched_record: Mapping[str, Any] | None = None
    match_basis: str = UNMATCHED
    candidates_considered: int = 0


def _same_venue(a: Any, b: Any, canonical: Callable[[str], str | None] | None) -> bool:
    if a is None or b is None:
        return False
    a, b = " ".join(str(a).split()), " ".join(str(b).split())
    if canonical is not None:
        a, b = canonical(a) or a, canonical(b) or b
    return a.casefold() == b.casefold()


def _same_year(a: Any, b: Any) -> bool:
    try:
        return int(a) == int(b)
    except (TypeError, ValueError):
        return False


def match_title(
    proceedings_title: str,
    venue: str,
    year: int,
    candidates: Sequence[Mapping[str, Any]],
    canonical_venue: Callable[[str], str | None] | None = None,
) -> MatchResult:
    """Match a proceedings title against raw candidate rows.

    A match needs normalized-title equality plus the same venue and year, and
    exactly one surviving candidate. Ambiguity is reported as unmatched.
    """
    key = normalize_title(proceedings_title)
    survivors = [
        c for c in candidates
        if isinstance(c.get("title"), str)
        and normalize_title(c["title"]) == key
        and _same_venue(c.get("venue"), venue, canonical_venue)
        and _same_year(c.get("year"), year)
    ]
    if len(survivors) == 1:
        return MatchResult(proceedings_title, True, survivors[0], EXACT, len(candidates))
    return MatchResult(proceedings_title, False, None, UNMATCHED, len(candidates))


@dataclass(frozen=True)
class DuplicateReport:
    key: tuple[str, str, int]
    kept: str
    removed: str
    reason: str


def _rank(r: PaperRecord) -> tuple[int, str]:
    # Highest citation count wins, then the smallest paper id.
    return (-r.citation_count, r.paper_id)


def deduplicate(records: Sequence[PaperRecord]) -> tuple[list[PaperRecord], list[DuplicateReport]]:
    """Keep one record per normalized (title, venue, year) and per paper id.

    Survivors keep the input order of their group's first appearance.
    """
    groups: dict[tuple[str, str, int], list[PaperRecord]] = {}
    for r in records:
        groups.setdefault(r.key, []).append(r)
    survivors: list[PaperRecord] = []
    reports: list[DuplicateReport] = []
    for key, group in groups.items():
        ordered = sorted(group, key=_rank)
        survivors.append(ordered[0])
        for loser in ordered[1:]:
            reports.append(DuplicateReport(key, ordered[0].paper_id, loser.paper_id, "title/venue/year"))

    # The same paper id can surface under two differently spelled titles.
    by_id: dict[str, list[PaperRecord]] = {}
    for r in survivors:
        by_id.setdefault(r.paper_id, []).append(r)
    dropped: set[int] = set()
    for pid, group in by_id.items():
        if len(group) > 1:
            ordered = sorted(group, key=lambda r: (-r.citation_count, r.key))
            for loser in ordered[1:]:
                dropped.add(id(loser))
                reports.append(DuplicateReport(loser.key, pid, pid, "paper id"))
    return [r for r in survivors if id(r) not in dropped], reports


_GAP_FIELDS = ("citationCount", "top_conf_citations", "top_journal_citations", "paperId", "ai_category", "notes")


def _absent(value: Any) -> bool:
    return value is None or (isinstance(value, str) and not value.strip())


def consolidate(
    primary_row: Mapping[str, Any],
    supplemental_row: Mapping[str, Any],
    window: tuple[int, int] = DEFAULT_WINDOW,
    venues=None,
) -> PaperRecord:
    """Merge two source rows for the same paper.

    Primary values win wherever present; the supplemental row only fills
    gaps. Filled fields are listed in ``notes`` as ``filled_from_supplemental``.
    """
    for name in ("venue", "year"):
        a, b = primary_row.get(name), supplemental_row.get(name)
        if _absent(a) or _absent(b):
            continue
        same = _same_year(a, b) if name == "year" else _same_venue(a, b, None)
        if not same:
            raise VenueYearMismatch(f"{name}: primary={a!r} supplemental={b!r}")

    merged = dict(primary_row)
    filled: list[str] = []
    names = set(_GAP_FIELDS) | {"title", "venue", "year"}
    names |= {f"{ANNUAL_PREFIX}{y}" for y in range(window[0], window[1] + 1)}
    for name in sorted(names):
        if _absent(merged.get(name)) and not _absent(supplemental_row.get(name)):
            merged[name] = supplemental_row[name]
            if name != "notes":
                filled.append(name)
    if filled:
        note = "filled_from_supplemental=" + "|".join(filled)
        merged["notes"] = f"{merged['notes']}; {note}" if not _absent(merged.get("notes")) else note
    return validate_record(merged, window=window, venues=venues)
