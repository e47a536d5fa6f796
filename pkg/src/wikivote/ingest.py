"""Page-view acquisition (live REST client and offline CSV) and party loading.

Two acquisition paths exist on purpose: the live per-article endpoint only
covers recent years, so historical series arrive as CSV dumps. Missing days
are absent from a series, never zero-filled; window operations decide their
own missing-data policy.
"""

from __future__ import annotations

import csv
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from urllib.parse import quote

import requests

from .errors import (
    CurationWarning,
    ComputationError,
    MissingPageError,
    NetworkError,
    RateLimitError,
    RowError,
    SchemaError,
)
from .model import PartyObservation

DEFAULT_BASE_URL = "https://wikimedia.org/api/rest_v1/metrics/pageviews/per-article"
BASE_URL_ENV_VAR = "WIKIVOTE_PAGEVIEWS_BASE_URL"

PAGEVIEWS_COLUMNS = ["wiki_project", "page_title", "date", "views"]
PARTY_COLUMNS = [
    "country", "election_date", "party_id", "name_english", "name_local",
    "abbreviation", "is_new", "is_incumbent", "vote_share", "prev_vote_share",
    "news_mentions", "wiki_project", "wiki_page_title",
]


@dataclass(frozen=True)
class PageViewSeries:
    """Daily view counts for one article in one language edition.

    Dates are kept strictly increasing; days without data are simply absent.
    """

    wiki_project: str
    page_title: str
    daily: dict[date, int]

    def __post_init__(self):
        ordered = dict(sorted(self.daily.items()))
        for day, count in ordered.items():
            if count < 0:
                raise ValueError(f"{self.page_title} {day}: negative view count {count}")
        object.__setattr__(self, "daily", ordered)

    @property
    def key(self) -> tuple[str, str]:
        return (self.wiki_project, self.page_title)

    def views_between(self, start: date, end: date) -> int:
        return sum(v for d, v in self.daily.items() if start <= d <= end)


@dataclass(frozen=True)
class FetchPolicy:
    max_in_flight: int = 4
    retry_limit: int = 3
    backoff_base: float = 0.5
    user_agent: str = "wikivote/0.1 (page-view research client)"

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")


def _base_url(override: str | None) -> str:
    return override or os.environ.get(BASE_URL_ENV_VAR) or DEFAULT_BASE_URL


def fetch_pageviews(
    project: str,
    title: str,
    start: date,
    end: date,
    policy: FetchPolicy | None = None,
    *,
    base_url: str | None = None,
    session=None,
    sleep=time.sleep,
) -> PageViewSeries:
    """Fetch daily per-article counts for [start, end] from the REST endpoint.

    404 maps to MissingPageError without retrying; 429 and 5xx are retried
    with exponential backoff up to policy.retry_limit. Only the `timestamp`
    and `views` fields of the response items are consumed.
    """
    if start > end:
        raise ValueError(f"start {start} is after end {end}")
    if not title:
        raise ValueError("title must be non-empty")
    policy = policy or FetchPolicy()
    url = "{base}/{project}/all-access/all-agents/{title}/daily/{s}00/{e}00".format(
        base=_base_url(base_url).rstrip("/"),
        project=project,
        title=quote(title.replace(" ", "_"), safe=""),
        s=start.strftime("%Y%m%d"),
        e=end.strftime("%Y%m%d"),
    )
    http = session or requests.Session()
    headers = {"User-Agent": policy.user_agent, "Accept": "application/json"}

    attempt = 0
    while True:
        try:
            response = http.get(url, headers=headers, timeout=30)
            status = response.status_code
        except requests.RequestException as exc:
            status = None
            failure = NetworkError(f"request failed for {project}/{title}: {exc}")
        if status == 404:
            raise MissingPageError(f"no page-view record for {project}/{title}")
        if status == 200:
            return _series_from_items(project, title, response.json(), start, end)
        if status is not None:
            if status != 429 and status < 500:
                raise NetworkError(f"unexpected HTTP {status} for {project}/{title}")
            kind = RateLimitError if status == 429 else NetworkError
            failure = kind(
                f"HTTP {status} for {project}/{title} after {attempt + 1} attempts"
            )
        if attempt >= policy.retry_limit:
            raise failure
        sleep(policy.backoff_base * 2**attempt)
        attempt += 1


def _series_from_items(project, title, payload, start, end) -> PageViewSeries:
    daily: dict[date, int] = {}
    for item in payload.get("items", []):
        stamp = str(item["timestamp"])
        day = date(int(stamp[0:4]), int(stamp[4:6]), int(stamp[6:8]))
        if start <= day <= end:
            daily[day] = int(item["views"])
    return PageViewSeries(wiki_project=project, page_title=title, daily=daily)


def fetch_many(
    pages: list[tuple[str, str]],
    start: date,
    end: date,
    policy: FetchPolicy | None = None,
    **kwargs,
) -> tuple[list[PageViewSeries], list[tuple[tuple[str, str], Exception]]]:
    """Fetch several pages concurrently, never more than max_in_flight at once.

    Returns (series in input order, per-page failures).
    """
    policy = policy or FetchPolicy()

    def one(page):
        project, title = page
        return fetch_pageviews(project, title, start, end, policy, **kwargs)

    results: list[PageViewSeries] = []
    failures: list[tuple[tuple[str, str], Exception]] = []
    with ThreadPoolExecutor(max_workers=policy.max_in_flight) as pool:
        futures = [pool.submit(one, page) for page in pages]
        for page, future in zip(pages, futures):
            try:
                results.append(future.result())
            except Exception as exc:  # itemized; callers decide what is fatal
                failures.append((page, exc))
    return results, failures


def _open_reader(path):
    handle = open(path, newline="", encoding="utf-8")
    return handle, csv.DictReader(handle)


def _require_columns(reader: csv.DictReader, required: list[str], path) -> None:
    fields = reader.fieldnames or []
    missing = [c for c in required if c not in fields]
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")


def load_pageviews_csv(path) -> list[PageViewSeries]:
    """Load `wiki_project,page_title,date,views` rows into one series per page.

    Rows may arrive in any date order; each series is re-sorted. Negative
    counts and malformed rows fail with their line number.
    """
    handle, reader = _open_reader(path)
    with handle:
        _require_columns(reader, PAGEVIEWS_COLUMNS, path)
        collected: dict[tuple[str, str], dict[date, int]] = {}
        for row in reader:
            line = reader.line_num
            try:
                project = row["wiki_project"]
                title = row["page_title"]
                day = date.fromisoformat(row["date"])
                views = int(row["views"])
            except (TypeError, KeyError, ValueError) as exc:
                raise RowError(line, f"malformed page-view row: {exc}") from exc
            if project is None or title is None or not project or not title:
                raise RowError(line, "empty wiki_project or page_title")
            if views < 0:
                raise RowError(line, f"negative view count {views}")
            day_map = collected.setdefault((project, title), {})
            if day in day_map:
                raise RowError(line, f"duplicate day {day} for {project}/{title}")
            day_map[day] = views
    return [
        PageViewSeries(wiki_project=project, page_title=title, daily=daily)
        for (project, title), daily in sorted(collected.items())
    ]


def save_pageviews_csv(series_list: list[PageViewSeries], path) -> None:
    """Inverse of load_pageviews_csv; loading the output reproduces the input."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(PAGEVIEWS_COLUMNS)
        for series in sorted(series_list, key=lambda s: s.key):
            for day, views in series.daily.items():
                writer.writerow([series.wiki_project, series.page_title, day.isoformat(), views])


def resolve_page_variant(
    candidates: list[PageViewSeries], window_start: date, window_end: date
) -> str:
    """Pick the candidate article with the most views inside the window.

    Exact ties keep the first candidate in input order, with a warning.
    """
    if not candidates:
        raise ValueError("need at least one candidate series")
    if window_start > window_end:
        raise ValueError("window_start is after window_end")
    sums = [c.views_between(window_start, window_end) for c in candidates]
    best = max(sums)
    if best == 0:
        raise ComputationError(
            "no signal: every candidate has zero views in the window"
        )
    winner = sums.index(best)
    if sums.count(best) > 1:
        warnings.warn(
            f"view-count tie at {best}; keeping first candidate "
            f"{candidates[winner].page_title!r}",
            CurationWarning,
            stacklevel=2,
        )
    return candidates[winner].page_title


def _parse_flag(text: str, column: str, line: int) -> bool:
    if text == "1":
        return True
    if text == "0":
        return False
    raise RowError(line, f"{column} must be 0 or 1, got {text!r}")


def load_party_csv(path) -> list[PartyObservation]:
    """Load the party dataset CSV into typed observations (strict parsing)."""
    handle, reader = _open_reader(path)
    with handle:
        _require_columns(reader, PARTY_COLUMNS, path)
        rows: list[PartyObservation] = []
        for row in reader:
            line = reader.line_num
            if any(row[c] is None for c in PARTY_COLUMNS):
                raise RowError(line, "row has fewer fields than the header")
            try:
                prev_raw = row["prev_vote_share"]
                obs = PartyObservation(
                    country=row["country"],
                    election_date=date.fromisoformat(row["election_date"]),
                    party_id=row["party_id"],
                    name_english=row["name_english"],
                    name_local=row["name_local"],
                    abbreviation=row["abbreviation"],
                    is_new=_parse_flag(row["is_new"], "is_new", line),
                    is_incumbent=_parse_flag(row["is_incumbent"], "is_incumbent", line),
                    vote_share=float(row["vote_share"]),
                    prev_vote_share=float(prev_raw) if prev_raw != "" else None,
                    news_mentions=int(row["news_mentions"]),
                    wiki_project=row["wiki_project"],
                    wiki_page_title=row["wiki_page_title"],
                )
            except RowError:
                raise
            except Exception as exc:
                raise RowError(line, f"malformed party row: {exc}") from exc
            rows.append(obs)
    return rows
