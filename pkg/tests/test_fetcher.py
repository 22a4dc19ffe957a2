import threading
import time
from datetime import datetime, timezone

import pytest

from rentscrape import fetcher
from rentscrape.fetcher import (
    CrawlAborted, CrawlConfig, FetchError, HostRateLimiter, Snapshot, SnapshotStore,
    crawl_region, fetch_page, iter_snapshots, read_snapshot, snapshot_from_bytes,
)
from rentscrape.fixture_site import FixtureSite, serve_site

HTML = "text/html"


def tiny_site(n_details, per_page=None, extra=None):
    """One region 'r' with n_details listing pages split over index pages."""
    per_page = per_page or max(n_details, 1)
    pages = {"/robots.txt": (200, "text/plain", b"User-agent: *\nDisallow: /private/\n")}
    ids = list(range(1, n_details + 1))
    chunks = [ids[k:k + per_page] for k in range(0, len(ids), per_page)] or [[]]
    for n, chunk in enumerate(chunks):
        path = "/r/search/apa" if n == 0 else f"/r/search/apa?s={n}"
        links = "".join(f'<a href="/r/apa/{i}.html" data-id="{i}">x</a>' for i in chunk)
        nxt = f'<a class="button next" href="/r/search/apa?s={n + 1}">next</a>' if n + 1 < len(chunks) else ""
        pages[path] = (200, HTML, f"<html><body>{links}{nxt}</body></html>".encode())
    for i in ids:
        pages[f"/r/apa/{i}.html"] = (200, HTML, f"<html><body>listing {i}</body></html>".encode())
    pages.update(extra or {})
    return FixtureSite(pages=pages, listings=[], regions=(), per_page=per_page)


def config_for(url, tmp_path, **kw):
    kw.setdefault("min_request_interval", 1.0)
    return CrawlConfig(regions=("r",), snapshot_dir=tmp_path / "snaps",
                       index_url_template=url + "/{region}/search/apa", **kw)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        CrawlConfig(regions=())
    with pytest.raises(ValueError):
        CrawlConfig(regions=("a",), max_pages_per_region=0)
    with pytest.raises(ValueError):
        CrawlConfig(regions=("a",), min_request_interval=0)


def test_fetch_echoes_bytes(tmp_path):
    body = bytes(range(256)) * 4
    site = tiny_site(0, extra={"/blob": (200, "application/octet-stream", body)})
    with serve_site(site) as url:
        snap = fetch_page(url + "/blob", config_for(url, tmp_path), limiter=HostRateLimiter())
    assert snap.body == body and snap.http_status == 200 and snap.parseable
    assert len(snap.content_hash) == 64


def test_404_is_a_snapshot_not_an_exception(tmp_path):
    with serve_site(tiny_site(0)) as url:
        snap = fetch_page(url + "/missing", config_for(url, tmp_path), limiter=HostRateLimiter())
    assert snap.http_status == 404 and not snap.parseable


def test_rate_limit_spacing(tmp_path):
    limiter = HostRateLimiter()
    with serve_site(tiny_site(2)) as url:
        cfg = config_for(url, tmp_path, min_request_interval=500.0)
        fetch_page(url + "/r/apa/1.html", cfg, limiter=limiter)
        t0 = time.monotonic()
        time.sleep(0.1)
        fetch_page(url + "/r/apa/2.html", cfg, limiter=limiter)
        assert time.monotonic() - t0 >= 0.5 - 1e-3
    (h1, a), (h2, b) = limiter.log
    assert h1 == h2 and b - a >= 0.5


def test_rate_limit_holds_under_threads(tmp_path):
    limiter = HostRateLimiter()
    with serve_site(tiny_site(8)) as url:
        cfg = config_for(url, tmp_path, min_request_interval=30.0)
        threads = [threading.Thread(target=fetch_page, args=(f"{url}/r/apa/{i}.html", cfg),
                                    kwargs={"limiter": limiter}) for i in range(1, 9)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    times = sorted(t for _, t in limiter.log)
    assert len(times) == 8
    assert all(b - a >= 0.030 for a, b in zip(times, times[1:]))


def test_network_failure_retries_then_raises(tmp_path):
    limiter = HostRateLimiter()
    cfg = CrawlConfig(regions=("r",), min_request_interval=5.0, timeout=1.0)
    with pytest.raises(FetchError):
        fetch_page("http://127.0.0.1:9/nothing", cfg, limiter=limiter)
    assert len(limiter.log) == fetcher.RETRY_ATTEMPTS


def test_one_index_three_details_returns_four(tmp_path):
    with serve_site(tiny_site(3)) as url:
        cfg = config_for(url, tmp_path)
        store = SnapshotStore(cfg.snapshot_dir)
        assert crawl_region("r", cfg, store, limiter=HostRateLimiter()) == 4
    kinds = sorted(s.kind for s in iter_snapshots(cfg.snapshot_dir))
    assert kinds == ["detail"] * 3 + ["index"]


def test_cap_limits_detail_pages(tmp_path):
    with serve_site(tiny_site(10, per_page=3)) as url:
        cfg = config_for(url, tmp_path, max_pages_per_region=2)
        crawl_region("r", cfg, SnapshotStore(cfg.snapshot_dir), limiter=HostRateLimiter())
    snaps = list(iter_snapshots(cfg.snapshot_dir))
    assert sum(s.kind == "detail" for s in snaps) == 2


@pytest.mark.parametrize("cap,per_page,n", [(1, 3, 10), (3, 2, 10), (5, 4, 30), (25, 5, 12)])
def test_snapshot_count_bound(tmp_path, cap, per_page, n):
    with serve_site(tiny_site(n, per_page=per_page)) as url:
        cfg = config_for(url, tmp_path, max_pages_per_region=cap)
        count = crawl_region("r", cfg, SnapshotStore(cfg.snapshot_dir), limiter=HostRateLimiter())
    assert count <= 1 + cap * (1 + per_page)
    assert count == len(list(iter_snapshots(cfg.snapshot_dir)))


def test_recrawl_is_idempotent(tmp_path):
    with serve_site(tiny_site(5, per_page=2)) as url:
        cfg = config_for(url, tmp_path)
        first = crawl_region("r", cfg, SnapshotStore(cfg.snapshot_dir), limiter=HostRateLimiter())
        before = sorted(p.name for p in cfg.snapshot_dir.rglob("*.snap"))
        keys1 = {(s.url, s.content_hash) for s in iter_snapshots(cfg.snapshot_dir)}
        second = crawl_region("r", cfg, SnapshotStore(cfg.snapshot_dir), limiter=HostRateLimiter())
        fresh = config_for(url, tmp_path / "other")
        crawl_region("r", fresh, SnapshotStore(fresh.snapshot_dir), limiter=HostRateLimiter())
    assert first == second
    assert sorted(p.name for p in cfg.snapshot_dir.rglob("*.snap")) == before
    assert {(s.url, s.content_hash) for s in iter_snapshots(fresh.snapshot_dir)} == keys1


def test_robots_respected_and_overridable(tmp_path):
    extra = {
        "/r/search/apa": (200, HTML, b'<html><a href="/r/apa/1.html" data-id="1">a</a>'
                                     b'<a href="/private/2.html" data-id="2">b</a></html>'),
        "/private/2.html": (200, HTML, b"<html>secret</html>"),
    }
    with serve_site(tiny_site(1, extra=extra)) as url:
        polite = config_for(url, tmp_path)
        crawl_region("r", polite, SnapshotStore(polite.snapshot_dir), limiter=HostRateLimiter())
        rude = config_for(url, tmp_path / "rude", respect_robots=False)
        crawl_region("r", rude, SnapshotStore(rude.snapshot_dir), limiter=HostRateLimiter())
    assert not any("/private/" in s.url for s in iter_snapshots(polite.snapshot_dir))
    assert any("/private/" in s.url for s in iter_snapshots(rude.snapshot_dir))


def test_unreachable_index_returns_zero(tmp_path, caplog):
    cfg = CrawlConfig(regions=("r",), min_request_interval=1.0, timeout=1.0,
                      snapshot_dir=tmp_path / "s", index_url_template="http://127.0.0.1:9/{region}")
    with caplog.at_level("WARNING"):
        assert crawl_region("r", cfg, SnapshotStore(cfg.snapshot_dir), limiter=HostRateLimiter()) == 0
    assert "empty crawl" in caplog.text


def test_store_failure_aborts_with_progress(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    with serve_site(tiny_site(3)) as url:
        cfg = config_for(url, tmp_path)
        with pytest.raises(CrawlAborted) as info:
            crawl_region("r", cfg, SnapshotStore(blocker), limiter=HostRateLimiter())
    assert info.value.written == 0


# --------------------------------------------------------------------------
# snapshot format and store


def test_snapshot_file_roundtrip(tmp_path):
    snap = Snapshot("https://x.org/a b?q=1&r=2", "r", datetime(2014, 5, 1, tzinfo=timezone.utc),
                    200, b"<html>\n\nbody</html>", kind="detail")
    back = snapshot_from_bytes(snap.to_bytes())
    assert back == snap
    store = SnapshotStore(tmp_path)
    assert store.put(snap) is True
    assert store.put(snap) is False
    (path,) = tmp_path.glob("r/*.snap")
    assert path.name == snap.content_hash + ".snap"
    assert read_snapshot(path) == snap
    assert SnapshotStore(tmp_path).put(snap) is False  # reloaded index


def test_hash_mismatch_detected():
    with pytest.raises(ValueError):
        Snapshot("u", "r", datetime.now(timezone.utc), 200, b"a", content_hash="0" * 64)


def test_store_concurrent_writers(tmp_path):
    store = SnapshotStore(tmp_path)
    now = datetime(2014, 5, 1, tzinfo=timezone.utc)
    snaps = [Snapshot(f"http://h/{i}", "r", now, 200, f"body {i}".encode()) for i in range(200)]
    threads = [threading.Thread(target=lambda chunk: [store.put(s) for s in chunk], args=(snaps[k::8],))
               for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert {s.url for s in iter_snapshots(tmp_path)} == {s.url for s in snaps}
    assert not list(tmp_path.rglob("*.tmp"))


def test_same_body_two_urls_both_kept(tmp_path):
    store = SnapshotStore(tmp_path)
    now = datetime(2014, 5, 1, tzinfo=timezone.utc)
    assert store.put(Snapshot("http://h/a", "r", now, 200, b"same"))
    assert store.put(Snapshot("http://h/b", "r", now, 200, b"same"))
    assert {s.url for s in iter_snapshots(tmp_path)} == {"http://h/a", "http://h/b"}


def test_fixture_site_crawl_matches_ground_truth(served, tmp_path):
    site, url = served
    cfg = CrawlConfig(regions=[p.region for p in site.regions], max_pages_per_region=1000,
                      min_request_interval=1.0, snapshot_dir=tmp_path / "s",
                      index_url_template=site.index_template(url))
    counts = fetcher.crawl(cfg)
    reachable = {l.path for l in site.listings}
    details = {s.url[len(url):] for s in iter_snapshots(cfg.snapshot_dir) if s.kind == "detail"}
    assert details == reachable
    assert sum(counts.values()) == len(list(iter_snapshots(cfg.snapshot_dir)))
