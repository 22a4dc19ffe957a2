"""Polite crawler that persists raw HTML snapshots for offline extraction.

Snapshots live at ``<snapshot_dir>/<region>/<content_hash>.snap``: one header
line of space-separated ``key=value`` pairs (values percent-encoded), a blank
line, then the raw response body.
"""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
import threading
import time
import urllib.robotparser
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import quote, unquote, urlsplit

import requests

logger = logging.getLogger(__name__)

DEFAULT_INDEX_TEMPLATE = "https://{region}.craigslist.org/search/apa"
RETRY_ATTEMPTS = 3


class FetchError(Exception):
    """Network failure that persisted through every retry."""


class CrawlAborted(Exception):
    """The snapshot store failed mid-crawl."""

    def __init__(self, message, written):
        super().__init__(f"{message} (snapshots persisted before failure: {written})")
        self.written = written


@dataclass(frozen=True)
class CrawlConfig:
    regions: tuple
    max_pages_per_region: int = 25
    min_request_interval: float = 2000.0  # milliseconds
    user_agent: str = "rentscrape/0.1 (research crawler)"
    timeout: float = 30.0  # seconds
    snapshot_dir: Path = Path("snapshots")
    respect_robots: bool = True
    index_url_template: str = DEFAULT_INDEX_TEMPLATE

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "snapshot_dir", Path(self.snapshot_dir))
        if not self.regions:
            raise ValueError("at least one region is required")
        if self.max_pages_per_region < 1:
            raise ValueError("max_pages_per_region must be >= 1")
        if not self.min_request_interval > 0:
            raise ValueError("min_request_interval must be > 0")

    @property
    def interval_seconds(self) -> float:
        return self.min_request_interval / 1000.0

    def index_url(self, region: str) -> str:
        return self.index_url_template.format(region=region)


def content_digest(body: bytes) -> str:
    return hashlib.sha256(body).hexdigest()


@dataclass(frozen=True)
class Snapshot:
    url: str
    region: str
    fetched_at: datetime
    http_status: int
    body: bytes
    kind: str = "detail"
    content_hash: str = field(default="")

    def __post_init__(self):
        digest = content_digest(self.body)
        if self.content_hash and self.content_hash != digest:
            raise ValueError(f"content hash mismatch for {self.url}")
        object.__setattr__(self, "content_hash", digest)

    @property
    def parseable(self) -> bool:
        return self.http_status < 400

    def header(self) -> str:
        pairs = [
            ("url", self.url),
            ("region", self.region),
            ("fetched_at", self.fetched_at.isoformat()),
            ("http_status", str(self.http_status)),
            ("kind", self.kind),
            ("content_hash", self.content_hash),
        ]
        return " ".join(f"{k}={quote(v, safe='')}" for k, v in pairs)

    def to_bytes(self) -> bytes:
        return self.header().encode("ascii") + b"\n\n" + self.body


def parse_header(line: str) -> dict:
    meta = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"malformed snapshot header token {token!r}")
        meta[key] = unquote(value)
    return meta


def snapshot_from_bytes(data: bytes) -> Snapshot:
    head, sep, body = data.partition(b"\n\n")
    if not sep:
        raise ValueError("snapshot has no header terminator")
    meta = parse_header(head.decode("ascii"))
    return Snapshot(
        url=meta["url"],
        region=meta["region"],
        fetched_at=datetime.fromisoformat(meta["fetched_at"]),
        http_status=int(meta["http_status"]),
        body=body,
        kind=meta.get("kind", "detail"),
        content_hash=meta.get("content_hash", ""),
    )


def read_snapshot(path) -> Snapshot:
    return snapshot_from_bytes(Path(path).read_bytes())


def iter_snapshots(snapshot_dir):
    """Yield every stored snapshot, ordered by path."""
    for path in sorted(Path(snapshot_dir).glob("*/*.snap")):
        yield read_snapshot(path)


class SnapshotStore:
    """Directory of snapshot files, deduplicated by (url, content_hash).

    Writes go through a temp file and ``os.replace`` so concurrent writers of
    distinct snapshots never see partial files.
    """

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._seen = {}
        self._paths = set()
        if self.root.is_dir():
            for path in self.root.glob("*/*.snap"):
                with open(path, "rb") as fh:
                    meta = parse_header(fh.readline().decode("ascii"))
                self._seen[(meta["url"], meta["content_hash"])] = path
                self._paths.add(path)

    def __contains__(self, key) -> bool:
        with self._lock:
            return key in self._seen

    def _path_for(self, snap: Snapshot) -> Path:
        base = self.root / snap.region
        path = base / f"{snap.content_hash}.snap"
        if path in self._paths:
            # identical body under a different URL
            url_tag = hashlib.sha256(snap.url.encode("utf-8")).hexdigest()[:12]
            path = base / f"{snap.content_hash}-{url_tag}.snap"
        return path

    def put(self, snap: Snapshot) -> bool:
        """Persist ``snap``; return False when an identical one is already stored."""
        key = (snap.url, snap.content_hash)
        with self._lock:
            if key in self._seen:
                return False
            path = self._path_for(snap)
            self._seen[key] = path
            self._paths.add(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(snap.to_bytes())
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        except OSError:
            with self._lock:
                self._seen.pop(key, None)
                self._paths.discard(path)
            raise
        return True


class HostRateLimiter:
    """Serializes requests per host and spaces them by a minimum interval.

    ``log`` records ``(host, monotonic_time)`` for every request issued.
    """

    def __init__(self, clock: Callable[[], float] = time.monotonic, sleep=time.sleep):
        self._clock = clock
        self._sleep = sleep
        self._guard = threading.Lock()
        self._host_locks = {}
        self._last = {}
        self.log = []

    def _lock_for(self, host):
        with self._guard:
            lock = self._host_locks.get(host)
            if lock is None:
                lock = self._host_locks[host] = threading.Lock()
            return lock

    def acquire(self, host: str, interval: float):
        """Block until ``interval`` seconds have passed since the last request to ``host``.

        Returns the host lock, held; the caller issues its request and releases.
        """
        lock = self._lock_for(host)
        lock.acquire()
        last = self._last.get(host)
        now = self._clock()
        while last is not None and now < last + interval:
            self._sleep(last + interval - now)
            now = self._clock()
        self._last[host] = now
        with self._guard:
            self.log.append((host, now))
        return lock


_default_limiter = HostRateLimiter()


class RobotsCache:
    def __init__(self):
        self._lock = threading.Lock()
        self._parsers = {}

    def allowed(self, url: str, config: CrawlConfig, limiter: HostRateLimiter) -> bool:
        parts = urlsplit(url)
        origin = f"{parts.scheme}://{parts.netloc}"
        with self._lock:
            parser = self._parsers.get(origin)
        if parser is None:
            parser = urllib.robotparser.RobotFileParser()
            try:
                snap = fetch_page(origin + "/robots.txt", config, limiter=limiter, kind="robots")
            except FetchError:
                snap = None
            if snap is None or snap.http_status >= 400:
                parser.parse([])
            else:
                parser.parse(snap.body.decode("utf-8", "replace").splitlines())
            with self._lock:
                self._parsers[origin] = parser
        return parser.can_fetch(config.user_agent, url)


def fetch_page(
    url: str,
    config: CrawlConfig,
    region: str = "",
    limiter: Optional[HostRateLimiter] = None,
    kind: str = "detail",
) -> Snapshot:
    """Fetch one page under the per-host rate limit.

    Network errors and timeouts are retried (3 attempts, backoff doubling from
    the request interval) and then raised as FetchError. HTTP error statuses
    are returned as non-parseable snapshots.
    """
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ValueError(f"not a fetchable URL: {url!r}")
    limiter = limiter or _default_limiter
    headers = {"User-Agent": config.user_agent}
    backoff = config.interval_seconds
    last_exc = None
    for attempt in range(1, RETRY_ATTEMPTS + 1):
        lock = limiter.acquire(parts.netloc, config.interval_seconds)
        try:
            resp = requests.get(url, headers=headers, timeout=config.timeout, allow_redirects=True)
            body = resp.content
            status = resp.status_code
        except requests.RequestException as exc:
            last_exc = exc
            logger.warning("fetch %s failed (attempt %d/%d): %s", url, attempt, RETRY_ATTEMPTS, exc)
        else:
            fetched_at = datetime.now(timezone.utc)
            if status >= 400:
                logger.warning("fetch %s returned HTTP %d", url, status)
            return Snapshot(url=url, region=region, fetched_at=fetched_at,
                            http_status=status, body=body, kind=kind)
        finally:
            lock.release()
        if attempt < RETRY_ATTEMPTS:
            time.sleep(backoff)
            backoff *= 2
    raise FetchError(f"giving up on {url} after {RETRY_ATTEMPTS} attempts: {last_exc}")


def crawl_region(
    region: str,
    config: CrawlConfig,
    store: SnapshotStore,
    selectors=None,
    limiter: Optional[HostRateLimiter] = None,
    robots: Optional[RobotsCache] = None,
) -> int:
    """Crawl index pages and listing pages for one region.

    ``max_pages_per_region`` caps both the number of index pages walked and
    the number of listing pages fetched. Returns the number of snapshots now
    held in the store for this crawl (newly written or already present).
    """
    from .extractor import default_selectors, next_index_url, parse_index

    selectors = selectors or default_selectors()
    limiter = limiter or _default_limiter
    robots = robots or RobotsCache()
    cap = config.max_pages_per_region

    def allowed(url):
        if not config.respect_robots or robots.allowed(url, config, limiter):
            return True
        logger.info("robots.txt disallows %s; skipped", url)
        return False

    persisted = 0
    new = 0

    def persist(snap):
        nonlocal persisted, new
        try:
            if store.put(snap):
                new += 1
        except OSError as exc:
            raise CrawlAborted(f"store write failed for {snap.url}: {exc}", persisted) from exc
        persisted += 1

    index_url = config.index_url(region)
    seen_urls = set()
    index_pages = 0
    details = 0
    while index_url and index_pages < cap and details < cap:
        if index_url in seen_urls or not allowed(index_url):
            break
        seen_urls.add(index_url)
        try:
            snap = fetch_page(index_url, config, region=region, limiter=limiter, kind="index")
        except FetchError as exc:
            logger.warning("index page unreachable for %s: %s", region, exc)
            break
        if not snap.parseable:
            logger.warning("index page %s returned HTTP %d", index_url, snap.http_status)
            break
        persist(snap)
        index_pages += 1
        fresh = 0
        for ref in parse_index(snap, selectors):
            if details >= cap:
                break
            if ref.url in seen_urls:
                continue
            seen_urls.add(ref.url)
            fresh += 1
            if not allowed(ref.url):
                continue
            try:
                detail = fetch_page(ref.url, config, region=region, limiter=limiter, kind="detail")
            except FetchError as exc:
                logger.warning("listing page skipped: %s", exc)
                continue
            persist(detail)
            details += 1
        if fresh == 0:
            break
        index_url = next_index_url(snap, selectors)

    if index_pages == 0:
        logger.warning("empty crawl for region %s: no index page reachable", region)
        return 0
    logger.info("region %s: %d snapshots (%d new, %d index pages)", region, persisted, new, index_pages)
    return persisted


def crawl(config: CrawlConfig, selectors=None, workers: int = 4) -> dict:
    """Crawl every configured region, in parallel across regions."""
    store = SnapshotStore(config.snapshot_dir)
    limiter = HostRateLimiter()
    robots = RobotsCache()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {
            region: pool.submit(crawl_region, region, config, store, selectors, limiter, robots)
            for region in config.regions
        }
        return {region: fut.result() for region, fut in futures.items()}
