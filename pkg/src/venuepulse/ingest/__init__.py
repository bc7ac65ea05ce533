"""Fetching, matching, cleaning and persisting raw citation rows."""

from .client import (
    EndpointUnreachable,
    FetchOutcome,
    MalformedResponse,
    RateLimiter,
    SourceClient,
    fetch_batch,
    source_configs,
)
from .matching import (
    DuplicateReport,
    MatchResult,
    VenueYearMismatch,
    consolidate,
    deduplicate,
    match_title,
)
from .pipeline import IngestReport, read_proceedings, run_ingest
from .store import IoFailure, SchemaViolation, dumps_corpus, load_corpus, persist_corpus

__all__ = [
    "DuplicateReport",
    "EndpointUnreachable",
    "FetchOutcome",
    "IngestReport",
    "IoFailure",
    "MalformedResponse",
    "MatchResult",
    "RateLimiter",
    "SchemaViolation",
    "SourceClient",
    "VenueYearMismatch",
    "consolidate",
    "deduplicate",
    "dumps_corpus",
    "fetch_batch",
    "load_corpus",
    "match_title",
    "persist_corpus",
    "read_proceedings",
    "run_ingest",
    "source_configs",
]
