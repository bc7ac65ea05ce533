from __future__ import annotations

import random
from pathlib import Path

import pytest

from venuepulse.corpus import DEFAULT_WINDOW, Corpus, PaperRecord

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, list] = {}


def make_record(
    pid: str,
    venue: str = "ACL",
    year: int = 2020,
    annual: dict[int, int] | None = None,
    citation_count: int | None = None,
    top_conf: int = 0,
    top_journal: int = 0,
    category: str | None = None,
    title: str | None = None,
    window: tuple[int, int] = DEFAULT_WINDOW,
) -> PaperRecord:
    annual = {y: 0 for y in range(window[0], window[1] + 1)} | (annual or {})
    total = sum(annual.values()) if citation_count is None else citation_count
    return PaperRecord(
        paper_id=pid,
        title=title or f"Paper {pid}",
        venue=venue,
        year=year,
        citation_count=total,
        annual_citations=annual,
        top_conf_citations=top_conf,
        top_journal_citations=top_journal,
        ai_category=category,
    )


def random_corpus(rng: random.Random, n: int = 40, venues=("ACL", "EMNLP"), window=(2014, 2018),
                  categories=("NLP", "CV")) -> Corpus:
    records = []
    for i in range(n):
        year = rng.randint(*window)
        annual = {y: (rng.randint(0, 30) if y >= year else 0) for y in range(window[0], window[1] + 1)}
        total = sum(annual.values()) + rng.randint(0, 5)
        records.append(
            make_record(
                f"p{i:04d}", rng.choice(venues), year, annual, total,
                top_conf=rng.randint(0, total), top_journal=rng.randint(0, total // 3),
                category=rng.choice(categories), window=window,
            )
        )
    return Corpus(records, window)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# --- acceptance criterion reporting ---------------------------------------------


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "_criterion", None)
    if marker is not None:
        _criteria.setdefault(marker[0], []).append((marker[1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        results = _criteria[number]
        text = results[0][0]
        status = "PASS" if all(o == "passed" for _, o in results) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {text} ({len(results)} checks)")
