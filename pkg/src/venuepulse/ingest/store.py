"""Reading and writing corpus files (CSV or JSON lines)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

from ..corpus import (
    ANNUAL_PREFIX,
    DEFAULT_WINDOW,
    Corpus,
    DuplicateRecord,
    RecordValidationError,
    VenuePulseError,
    validate_record,
    window_years,
)

BASE_COLUMNS = [
    "paperId",
    "title",
    "venue",
    "year",
    "ai_category",
    "notes",
    "citationCount",
    "top_conf_citations",
    "top_journal_citations",
]


class IoFailure(VenuePulseError, OSError):
    pass


class SchemaViolation(VenuePulseError, ValueError):
    def __init__(self, message: str, row: int | None = None, fields: Iterable[str] = ()):
        self.row = row
        self.fields = list(fields)
        super().__init__(message)


def _format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    return "csv"


def columns_for(corpus: Corpus) -> list[str]:
    cols = BASE_COLUMNS + [f"{ANNUAL_PREFIX}{y}" for y in window_years(corpus.window)]
    extras: list[str] = []
    for r in corpus.records:
        for k in r.extra:
            if k not in extras and k not in cols:
                extras.append(k)
    return cols + extras


def dumps_corpus(corpus: Corpus, fmt: str = "csv") -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(r.to_row(corpus.window), ensure_ascii=False) + "\n" for r in corpus.records)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns_for(corpus), lineterminator="\n")
    w.writeheader()
    for r in corpus.records:
        w.writerow({k: "" if v is None else v for k, v in r.to_row(corpus.window).items()})
    return buf.getvalue()


def persist_corpus(corpus: Corpus, path: str | Path) -> int:
    """Write ``corpus`` to ``path`` atomically; returns bytes written."""
    path = Path(path)
    data = dumps_corpus(corpus, _format(path)).encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return len(data)


def _rows(path: Path) -> Iterable[tuple[int, dict[str, Any]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        if _format(path) == "jsonl":
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(f"{path}: line {i}: invalid JSON ({exc.msg})", i) from exc
                if not isinstance(row, dict):
                    raise SchemaViolation(f"{path}: line {i}: expected an object", i)
                yield i, row
        else:
            # Row numbers count the header as row 1.
            for i, row in enumerate(csv.DictReader(fh), start=2):
                yield i, {k: v for k, v in row.items() if k is not None}


def load_corpus(
    path: str | Path,
    window: tuple[int, int] = DEFAULT_WINDOW,
    venues: Iterable[str] | None = None,
    default_venue: str | None = None,
) -> Corpus:
    """Load and validate a corpus file.

    Raises :class:`SchemaViolation` naming the offending row and fields on
    the first invalid row, and on duplicate papers.
    """
    path = Path(path)
    venues = list(venues) if venues is not None else None
    records = []
    try:
        for i, raw in _rows(path):
            try:
                records.append(validate_record(raw, window=window, venues=venues, default_venue=default_venue))
            except RecordValidationError as exc:
                fields = [issue.field for issue in exc.issues]
                raise SchemaViolation(f"{path}: row {i}: {exc}", i, fields) from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        return Corpus(records, window)
    except DuplicateRecord as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc
