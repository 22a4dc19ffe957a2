import csv
import json
import random
import string
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings, strategies as st

from rentscrape import extractor
from rentscrape.extractor import (
    ListingRejected, SelectorError, normalize_area, normalize_bedrooms, normalize_coordinate,
    normalize_coords, normalize_datetime, normalize_money, parse_index, parse_listing,
    parse_selectors,
)
from rentscrape.fetcher import Snapshot
from rentscrape.records import dumps

COLLECTED = datetime(2014, 6, 3, 8, 0, tzinfo=timezone.utc)
BASE_URL = "https://fixture.example/apa/"


def page_snapshot(path, status=200):
    return Snapshot(BASE_URL + path.name, "fixture", COLLECTED, status, path.read_bytes())


def expected_records(fixtures_dir):
    lines = (fixtures_dir / "expected.jsonl").read_text("utf-8").splitlines()
    return {json.loads(line)["url"]: line for line in lines}


def expected_rejects(fixtures_dir):
    with open(fixtures_dir / "rejected.csv", newline="") as fh:
        return {row["page"]: row["reason"] for row in csv.DictReader(fh)}


def test_fixture_corpus_is_large_enough(fixtures_dir):
    assert len(list((fixtures_dir / "pages").glob("*.html"))) >= 20


def test_each_fixture_page(fixtures_dir):
    selectors = extractor.default_selectors()
    expected = expected_records(fixtures_dir)
    rejects = expected_rejects(fixtures_dir)
    for path in sorted((fixtures_dir / "pages").glob("*.html")):
        snap = page_snapshot(path)
        if path.name in rejects:
            with pytest.raises(ListingRejected) as info:
                parse_listing(snap, selectors)
            assert info.value.reason == rejects[path.name], path.name
        else:
            assert dumps(parse_listing(snap, selectors)) == expected[snap.url], path.name


def test_extract_snapshots_sorted_with_rejects(fixtures_dir):
    snaps = [page_snapshot(p) for p in sorted((fixtures_dir / "pages").glob("*.html"))]
    snaps.append(Snapshot(BASE_URL + "gone.html", "fixture", COLLECTED, 404, b"not found"))
    snaps.append(Snapshot(BASE_URL + "index", "fixture", COLLECTED, 200, b"<html/>", kind="index"))
    listings, rejects = extractor.extract_snapshots(reversed(snaps))
    assert [l.listing_id for l in listings] == sorted(l.listing_id for l in listings)
    assert len(listings) == len(expected_records(fixtures_dir))
    assert (BASE_URL + "gone.html", "HTTP 404") in rejects
    assert len(rejects) == len(expected_rejects(fixtures_dir)) + 1


def test_removing_one_field_affects_only_that_field(fixtures_dir):
    page = (fixtures_dir / "pages" / "01-complete.html").read_bytes()
    full = parse_listing(Snapshot(BASE_URL + "a", "fixture", COLLECTED, 200, page),
                         extractor.default_selectors())
    stripped = page.replace(b'<span class="price">$1450</span>', b"")
    part = parse_listing(Snapshot(BASE_URL + "a", "fixture", COLLECTED, 200, stripped),
                         extractor.default_selectors())
    assert part.rent is None
    assert part.sqft == full.sqft and part.latitude == full.latitude and part.title == full.title


def test_parse_index_dedups_and_resolves(site):
    path = "/northfield/search/apa"
    snap = Snapshot("http://h" + path, "northfield", COLLECTED, 200, site.pages[path][2], kind="index")
    refs = parse_index(snap, extractor.default_selectors())
    assert len(refs) == site.per_page
    assert all(r.url.startswith("http://h/northfield/apa/") for r in refs)
    assert extractor.next_index_url(snap, extractor.default_selectors()) == "http://h" + path + "?s=20"


def test_parse_index_no_match_records_diagnostic():
    diag = []
    snap = Snapshot("http://h/x", "r", COLLECTED, 200, b"<html><body><p>nothing</p></body></html>")
    assert parse_index(snap, extractor.default_selectors(), diag) == []
    assert "matched no listings" in diag[0]


# --------------------------------------------------------------------------
# selector files


def test_selector_file_errors():
    with pytest.raises(SelectorError, match="index"):
        parse_selectors("[selectorset]\nname = x\n")
    bad_xpath = "[selectorset]\n[index]\nlisting = //a[\nid = @x\nurl = @href\n"
    with pytest.raises(SelectorError, match="bad XPath"):
        parse_selectors(bad_xpath)
    unknown = ("[selectorset]\n[index]\nlisting = //a\nid = @x\nurl = @href\n"
               "[field.listing_id]\nxpath = //p\n[field.colour]\nxpath = //p\n")
    with pytest.raises(SelectorError, match="unknown field"):
        parse_selectors(unknown)


def test_alternate_selector_set_without_code_change():
    ini = """
[selectorset]
name = other-layout
[index]
listing = //li[@class="result"]/a
id = @data-pid
url = @href
[field.listing_id]
xpath = //article/@data-pid
normalize = digits
[field.posted_at]
xpath = //article/@data-posted
normalize = datetime
[field.rent]
xpath = //dd[@class="rent"]
normalize = money
"""
    sel = parse_selectors(ini)
    html = (b'<html><body><article data-pid="77" data-posted="2014-05-01T10:00:00+00:00">'
            b'<dl><dd class="rent">USD 1,250 per month</dd></dl></article></body></html>')
    got = parse_listing(Snapshot("http://h/77", "r", COLLECTED, 200, html), sel)
    assert (got.listing_id, got.rent) == ("77", 1250)


# --------------------------------------------------------------------------
# normalizers


@pytest.mark.parametrize("text,value", [
    ("$1450", 1450), ("$1,295", 1295), ("$ 875", 875), ("$1,150.75", 1150), ("Rent $1325/mo", 1325),
    ("1200", 1200), ("$0", None), ("$call", None), ("", None), ("free", None),
    ("$99999999999999999999", None),
])
def test_money_examples(text, value):
    assert normalize_money(text) == value


@pytest.mark.parametrize("text,value", [
    ("/ 2br - 900ft2 -", 900), ("1,200 sq ft", 1200), ("850 sqft", 850), ("700 square feet", 700),
    ("900", None), ("ft2", None),
])
def test_area_examples(text, value):
    assert normalize_area(text) == value


@pytest.mark.parametrize("text,value", [
    ("/ 2br - 900ft2 -", 2), ("3 bedrooms", 3), ("studio", 0), ("Studio apartment", 0), ("br", None),
])
def test_bedroom_examples(text, value):
    assert normalize_bedrooms(text) == value


def test_coordinate_examples():
    assert normalize_coords("44.95", "-93.26") == (44.95, -93.26)
    assert normalize_coords("0", "0") is None
    assert normalize_coords("123.4", "10") is None
    assert normalize_coords("north", "10") is None
    assert normalize_coordinate("nan") is None and normalize_coordinate("inf") is None


def test_datetime_examples():
    assert normalize_datetime("2014-05-12T10:22:31-0700").utcoffset().total_seconds() == -7 * 3600
    assert normalize_datetime("2014-05-29T09:15:00Z").utcoffset().total_seconds() == 0
    assert normalize_datetime("2014-06-01 14:00") == datetime(2014, 6, 1, 14, 0)
    assert normalize_datetime("yesterday") is None


def _random_text(rng):
    alphabet = string.printable + "$,.²€ñ☀" + "0123456789" * 3
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 40)))


def test_normalizers_total_over_10k_inputs():
    rng = random.Random(1)
    for _ in range(10_000):
        text = _random_text(rng)
        for norm in extractor.NORMALIZERS.values():
            norm(text)  # must not raise
        m = normalize_money(text)
        assert m is None or (isinstance(m, int) and m > 0)
        c = normalize_coords(text, _random_text(rng))
        assert c is None or (-90 <= c.latitude <= 90 and -180 <= c.longitude <= 180)


@settings(max_examples=10_000)
@given(st.integers(1, 10**12), st.booleans(), st.sampled_from(["", "/mo", " per month", ".00"]))
def test_money_roundtrip(amount, commas, suffix):
    text = f"${amount:,}{suffix}" if commas else f"${amount}{suffix}"
    assert normalize_money(text) == amount


@given(st.text())
def test_normalizers_total_on_arbitrary_unicode(text):
    for norm in extractor.NORMALIZERS.values():
        norm(text)
