"""HTTP clients for scholarly metadata sources.

Wire format: ``GET {base_endpoint}/search?title=...&venue=...&year=...``
returning JSON, either a list of rows or ``{"data": [rows]}``. Rows use
the raw ledger field names (``paperId``, ``title``, ``venue``, ``year``,
``citationCount``, ``citations_YYYY`` ...). An API key, when configured, is
sent in the ``x-api-key`` header.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import requests

from ..corpus import VenuePulseError
from .matching import MatchResult, match_title

log = logging.getLogger(__name__)

PRIMARY = "primary"
SUPPLEMENTAL = "supplemental"

ENV_API_KEY = "VENUEPULSE_API_KEY"
ENV_ENDPOINT = "VENUEPULSE_ENDPOINT"

TRANSIENT_STATUS = {429, 500, 502, 503, 504}


class EndpointUnreachable(VenuePulseError, ConnectionError):
    pass


class MalformedResponse(VenuePulseError, ValueError):
    pass


class RateLimiter:
    """At most ``limit`` acquisitions in any ``period``-second span."""

    def __init__(self, limit: float, period: float = 1.0, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if limit <= 0:
            raise ValueError("rate limit must be positive")
        self.limit = max(1, int(limit))
        self.period = period if limit >= 1 else period / limit
        self._clock = clock
        self._sleep = sleep
        self._issued: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                while self._issued and now - self._issued[0] >= self.period:
                    self._issued.popleft()
                if len(self._issued) < self.limit:
                    self._issued.append(now)
                    return
                self._sleep(self.period - (now - self._issued[0]))


@dataclass
class SourceClient:
    name: str
    base_endpoint: str
    requests_per_second: float = 1.0
    max_attempts: int = 3
    backoff_ms: float = 500.0
    priority: str = PRIMARY
    api_key: str | None = None
    timeout: float = 30.0
    session: Any = None
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    def __post_init__(self) -> None:
        if self.requests_per_second <= 0:
            raise ValueError("requests_per_second must be > 0")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.priority not in (PRIMARY, SUPPLEMENTAL):
            raise ValueError(f"priority must be {PRIMARY!r} or {SUPPLEMENTAL!r}")
        self.limiter = RateLimiter(self.requests_per_second, sleep=self.sleep)
        if self.session is None:
            self.session = requests.Session()
        self.retries = 0

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any], **kwargs) -> "SourceClient":
        return cls(
            name=cfg.get("name", cfg.get("priority", PRIMARY)),
            base_endpoint=cfg["base_endpoint"],
            requests_per_second=float(cfg.get("requests_per_second", 1.0)),
            max_attempts=int(cfg.get("max_attempts", 3)),
            backoff_ms=float(cfg.get("backoff_ms", 500.0)),
            priority=cfg.get("priority", PRIMARY),
            api_key=cfg.get("api_key"),
            timeout=float(cfg.get("timeout", 30.0)),
            **kwargs,
        )

    def search(self, title: str, venue: str, year: int) -> list[dict[str, Any]]:
        """Candidate rows for one query, retrying transient failures."""
        url = self.base_endpoint.rstrip("/") + "/search"
        headers = {"x-api-key": self.api_key} if self.api_key else {}
        params = {"title": title, "venue": venue, "year": str(year)}
        last_error = "no attempt made"
        for attempt in range(1, self.max_attempts + 1):
            self.limiter.acquire()
            try:
                resp = self.session.get(url, params=params, headers=headers, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code in TRANSIENT_STATUS:
                    last_error = f"HTTP {resp.status_code}"
                elif resp.status_code >= 400:
                    raise EndpointUnreachable(f"{self.name}: HTTP {resp.status_code} for {title!r}")
                else:
                    return _parse_rows(resp)
            if attempt < self.max_attempts:
                self.retries += 1
                delay = self.backoff_ms / 1000.0 * 2 ** (attempt - 1)
                log.warning("%s: retry %d for %r after %s (sleep %.3fs)", self.name, attempt, title, last_error, delay)
                self.sleep(delay)
        raise EndpointUnreachable(f"{self.name}: {last_error} after {self.max_attempts} attempts")


def _parse_rows(resp) -> list[dict[str, Any]]:
    try:
        payload = resp.json()
    except ValueError as exc:
        raise MalformedResponse(f"response is not JSON: {exc}") from exc
    if isinstance(payload, Mapping):
        payload = payload.get("data", [])
    if not isinstance(payload, list):
        raise MalformedResponse("expected a list of rows")
    for row in payload:
        if not isinstance(row, Mapping) or not isinstance(row.get("title"), str):
            raise MalformedResponse(f"row without a title: {row!r}"[:200])
    return [dict(r) for r in payload]


@dataclass
class FetchOutcome:
    query: tuple[str, str, int]
    row: dict[str, Any] | None = None
    match: MatchResult | None = None
    error: VenuePulseError | None = None

    @property
    def ok(self) -> bool:
        return self.row is not None


def fetch_batch(
    client: SourceClient,
    queries: Sequence[tuple[str, str, int]],
    workers: int = 1,
    canonical_venue: Callable[[str], str | None] | None = None,
) -> list[FetchOutcome]:
    """Fetch and exactly match one row per (title, venue, year) query.

    Per-query failures are recorded on the outcome and never abort the
    batch. Matched rows are stamped with the query's venue and year.
    """

    def one(q: tuple[str, str, int]) -> FetchOutcome:
        title, venue, year = q
        try:
            candidates = client.search(title, venue, year)
        except (EndpointUnreachable, MalformedResponse) as exc:
            log.error("%s: %s", client.name, exc)
            return FetchOutcome(q, error=exc)
        m = match_title(title, venue, year, candidates, canonical_venue)
        row = None
        if m.matched:
            row = dict(m.matched_record)
            row["venue"], row["year"] = venue, year
        return FetchOutcome(q, row, m)

    if not queries:
        return []
    if workers <= 1:
        return [one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, queries))


def source_configs(config: Mapping[str, Any], env: Mapping[str, str] | None = None) -> list[dict[str, Any]]:
    """Source settings from the run config, with environment overrides.

    ``VENUEPULSE_ENDPOINT`` and ``VENUEPULSE_API_KEY`` override the primary
    source only.
    """
    env = os.environ if env is None else env
    sources = [dict(s) for s in config.get("sources", [])]
    primary = next((s for s in sources if s.get("priority", PRIMARY) == PRIMARY), None)
    if primary is None and env.get(ENV_ENDPOINT):
        primary = {"name": "primary", "priority": PRIMARY}
        sources.insert(0, primary)
    if primary is not None:
        if env.get(ENV_ENDPOINT):
            primary["base_endpoint"] = env[ENV_ENDPOINT]
        if env.get(ENV_API_KEY):
            primary["api_key"] = env[ENV_API_KEY]
    for s in sources:
        if not s.get("base_endpoint"):
            raise ValueError(f"source {s.get('name')!r} has no base_endpoint")
    return sources
