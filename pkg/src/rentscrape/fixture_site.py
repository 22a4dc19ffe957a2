"""Deterministic synthetic listing site for offline end-to-end runs.

``generate_site`` builds every page of a small listing site (index pages with
"next" links, listing pages in the 2014 layout, robots.txt) from a seed, plus
ground truth and a matching reference bundle: crosswalk, ACS, FMR and HUD
median tables and census-tract-like polygons. ``serve_site`` exposes the pages
over HTTP on localhost.

    python -m rentscrape.fixture_site --bundle refdir --port 8765
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import html
import json
import logging
import random
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

INDEX_PATH = "/{region}/search/apa"
LISTING_PATH = "/{region}/apa/{listing_id}.html"
PACIFIC = timezone(timedelta(hours=-7))


@dataclass(frozen=True)
class RegionPlan:
    region: str
    area_id: str
    area_name: str
    kind: str
    fmr_excluded: bool
    lon: float
    lat: float
    rpsf: float  # typical rent per square foot
    income: int
    population: int


DEFAULT_REGIONS = (
    RegionPlan("northfield", "northfield_msa", "Northfield, XA MSA", "MSA", False,
               -93.25, 44.95, 1.35, 68000, 3400000),
    RegionPlan("southport", "southport_msa", "Southport, XB MSA", "MSA", True,
               -96.80, 32.78, 0.95, 59000, 6900000),
    RegionPlan("eastlake", "lakes_csa", "Eastlake-Westbrook, XC CSA", "CSA", False,
               -122.27, 37.80, 2.60, 93000, 8400000),
    RegionPlan("westbrook", "lakes_csa", "Eastlake-Westbrook, XC CSA", "CSA", False,
               -122.42, 37.77, 2.60, 93000, 8400000),
)

BEDROOM_SQFT = {0: 480, 1: 700, 2: 950, 3: 1250, 4: 1600}
FMR_FACTOR = 0.85
HUD_FACTOR = 0.95
TRACT_STEP = 0.02
TRACT_GRID = 3


@dataclass
class FixtureListing:
    listing_id: str
    region: str
    title: str
    posted_at: Optional[datetime]
    rent_text: Optional[str]
    housing_text: Optional[str]
    lat: Optional[float]
    lon: Optional[float]
    path: str
    status: int = 200


@dataclass
class FixtureSite:
    pages: dict  # path -> (status, content type, body bytes)
    listings: list
    regions: tuple
    per_page: int
    robots_disallow: tuple = ("/private/",)
    polygons: list = field(default_factory=list)

    def index_template(self, base_url: str) -> str:
        return base_url.rstrip("/") + INDEX_PATH


# --------------------------------------------------------------------------
# page rendering


def render_listing_page(item: FixtureListing) -> bytes:
    parts = ['<span class="postingtitletext">']
    if item.rent_text is not None:
        parts.append(f'<span class="price">{html.escape(item.rent_text)}</span> ')
    parts.append(f'<span id="titletextonly">{html.escape(item.title)}</span>')
    if item.housing_text is not None:
        parts.append(f' <span class="housing">{item.housing_text}</span>')
    parts.append("</span>")
    title_block = "".join(parts)
    mapdiv = ""
    if item.lat is not None and item.lon is not None:
        mapdiv = (f'<div id="map" class="viewposting" data-latitude="{item.lat}" '
                  f'data-longitude="{item.lon}" data-accuracy="0"></div>\n')
    posted = ""
    if item.posted_at is not None:
        stamp = item.posted_at.strftime("%Y-%m-%dT%H:%M:%S%z")
        shown = item.posted_at.strftime("%Y-%m-%d %I:%M%p").lower()
        posted = f'<p class="postinginfo reveal">posted: <time datetime="{stamp}">{shown}</time></p>\n'
    doc = f"""<!DOCTYPE html>
<html class="no-js"><head>
<title>{html.escape(item.title)}</title>
<meta charset="UTF-8">
</head>
<body class="posting">
<section class="body">
<h2 class="postingtitle">{title_block}</h2>
<section class="userbody">
{mapdiv}<section id="postingbody">{html.escape(item.title)}. Call for a showing.</section>
<div class="postinginfos">
<p class="postinginfo">post id: {item.listing_id}</p>
{posted}</div>
</section>
</section>
</body></html>
"""
    return doc.encode("utf-8")


def render_index_page(region: str, rows: list, next_path: Optional[str]) -> bytes:
    lines = [
        "<!DOCTYPE html>",
        f"<html><head><title>{region} apartments / housing for rent</title></head>",
        '<body class="search"><div class="content">',
    ]
    for item in rows:
        lines.append(
            f'<p class="row" data-pid="{item.listing_id}">'
            f'<a href="{item.path}" data-id="{item.listing_id}" class="hdrlnk">'
            f"{html.escape(item.title)}</a></p>"
        )
    if next_path:
        lines.append(f'<a href="{next_path}" class="button next" title="next page">next &gt; </a>')
    lines.append("</div></body></html>")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# generation


def _housing(rng, beds, sqft):
    label = "studio" if beds == 0 and rng.random() < 0.5 else f"{beds}br"
    if sqft is None:
        return f"/ {label} -"
    return f"/ {label} - {sqft}ft<sup>2</sup> -"


def _make_listing(rng, plan: RegionPlan, listing_id: str, start: datetime) -> FixtureListing:
    beds = rng.choices((0, 1, 2, 3, 4), weights=(8, 30, 35, 20, 7))[0]
    sqft = int(BEDROOM_SQFT[beds] * rng.uniform(0.75, 1.3))
    rent = int(sqft * plan.rpsf * rng.lognormvariate(0, 0.18))
    posted = start + timedelta(days=rng.randrange(0, 61), minutes=rng.randrange(0, 24 * 60))
    lat = round(plan.lat + rng.uniform(-0.035, 0.035), 6)
    lon = round(plan.lon + rng.uniform(-0.035, 0.035), 6)
    roll = rng.random()
    rent_text = f"${rent:,}" if rng.random() < 0.5 else f"${rent}"
    housing = _housing(rng, beds, sqft)
    if roll < 0.05:
        housing = _housing(rng, beds, None)  # no square footage
    elif roll < 0.08:
        lat = lon = None  # no map pin
    elif roll < 0.09:
        lat, lon = 0.0, 0.0  # placeholder pin
    elif roll < 0.10:
        rent_text = "$1"  # nominal price
    elif roll < 0.11:
        rent_text = f"${rng.randrange(10**6, 10**9):,}"
    elif roll < 0.12:
        rent_text = None
    title = f"{['Studio', '1BR', '2BR', '3BR', '4BR'][beds]} in {plan.region.title()}"
    return FixtureListing(
        listing_id=listing_id,
        region=plan.region,
        title=title,
        posted_at=posted,
        rent_text=rent_text,
        housing_text=housing,
        lat=lat,
        lon=lon,
        path=LISTING_PATH.format(region=plan.region, listing_id=listing_id),
    )


def _tract_polygons(plan: RegionPlan, region_no: int) -> list:
    """A TRACT_GRID x TRACT_GRID block of square tracts; the centre one has a hole."""
    polys = []
    half = TRACT_GRID * TRACT_STEP / 2
    x0 = round(plan.lon - half, 6)
    y0 = round(plan.lat - half, 6)
    for i in range(TRACT_GRID):
        for j in range(TRACT_GRID):
            ax, ay = round(x0 + i * TRACT_STEP, 6), round(y0 + j * TRACT_STEP, 6)
            bx, by = round(ax + TRACT_STEP, 6), round(ay + TRACT_STEP, 6)
            ring = [[ax, ay], [bx, ay], [bx, by], [ax, by], [ax, ay]]
            rings = [ring]
            if i == j == TRACT_GRID // 2:
                q = TRACT_STEP / 4
                hx0, hy0 = round(ax + q, 6), round(ay + q, 6)
                hx1, hy1 = round(bx - q, 6), round(by - q, 6)
                rings.append([[hx0, hy0], [hx0, hy1], [hx1, hy1], [hx1, hy0], [hx0, hy0]])
            polys.append((f"{90 + region_no:02d}{i}{j}00", rings))
    return polys


def generate_site(seed: int = 2014, regions=DEFAULT_REGIONS, listings_per_region: int = 45,
                  per_page: int = 20) -> FixtureSite:
    rng = random.Random(seed)
    start = datetime(2014, 5, 1, tzinfo=PACIFIC)
    pages = {}
    all_listings = []
    polygons = []
    next_id = 4400000000 + seed % 1000 * 100000
    for region_no, plan in enumerate(regions):
        items = []
        for _ in range(listings_per_region):
            items.append(_make_listing(rng, plan, str(next_id), start))
            next_id += rng.randrange(1, 50)
        # a repost: same listing under a second URL in the same region
        dup = items[len(items) // 3]
        repost = FixtureListing(**{**dup.__dict__, "path": f"/{plan.region}/apa/{dup.listing_id}-repost.html"})
        items.append(repost)
        # pages that must be rejected by extraction
        undated = _make_listing(rng, plan, str(next_id), start)
        undated.posted_at = None
        next_id += 1
        items.append(undated)
        gone = _make_listing(rng, plan, str(next_id), start)
        gone.status = 404
        next_id += 1
        items.append(gone)
        for item in items:
            if item.status == 200:
                pages[item.path] = (200, "text/html; charset=utf-8", render_listing_page(item))
        # index pages
        base = INDEX_PATH.format(region=plan.region)
        chunks = [items[k:k + per_page] for k in range(0, len(items), per_page)]
        for n, chunk in enumerate(chunks):
            path = base if n == 0 else f"{base}?s={n * per_page}"
            nxt = f"{base}?s={(n + 1) * per_page}" if n + 1 < len(chunks) else None
            pages[path] = (200, "text/html; charset=utf-8", render_index_page(plan.region, chunk, nxt))
        all_listings.extend(items)
        polygons.extend((plan.area_id, tract, rings) for tract, rings in _tract_polygons(plan, region_no))
    pages["/robots.txt"] = (200, "text/plain", b"User-agent: *\nDisallow: /private/\n")
    return FixtureSite(pages=pages, listings=all_listings, regions=tuple(regions),
                       per_page=per_page, polygons=polygons)


# --------------------------------------------------------------------------
# reference bundle


def write_reference_bundle(site: FixtureSite, dest) -> dict:
    """Write crosswalk, ACS, FMR, HUD median and tract files; return their paths."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    areas = {}
    for plan in site.regions:
        areas.setdefault(plan.area_id, []).append(plan)
    paths = {name: dest / name for name in
             ("crosswalk.txt", "acs.csv", "fmr.csv", "hud_median.csv", "tracts.geojson")}

    sections = []
    for area_id, plans in areas.items():
        head = plans[0]
        lines = [f"region = {p.region}" for p in plans]
        lines += [f"area = {area_id}", f"name = {head.area_name}", f"kind = {head.kind}",
                  f"fmr_excluded = {'true' if head.fmr_excluded else 'false'}"]
        sections.append("\n".join(lines))
    paths["crosswalk.txt"].write_text("\n\n".join(sections) + "\n", encoding="utf-8")

    with open(paths["acs.csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["area_id", "median_income", "population"])
        for area_id, plans in areas.items():
            w.writerow([area_id, plans[0].income, plans[0].population])

    with open(paths["fmr.csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["area_id", "bedrooms", "fmr"])
        for area_id, plans in areas.items():
            if plans[0].fmr_excluded:
                continue
            for beds, sqft in BEDROOM_SQFT.items():
                w.writerow([area_id, beds, round(sqft * plans[0].rpsf * FMR_FACTOR)])

    with open(paths["hud_median.csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["area_id", "bedrooms", "median_rent"])
        for area_id, plans in areas.items():
            for beds in (1, 2, 3, 4):
                w.writerow([area_id, beds, round(BEDROOM_SQFT[beds] * plans[0].rpsf * HUD_FACTOR)])

    features = [
        {"type": "Feature",
         "properties": {"GEOID": tract, "area_id": area_id},
         "geometry": {"type": "Polygon", "coordinates": rings}}
        for area_id, tract, rings in site.polygons
    ]
    paths["tracts.geojson"].write_text(
        json.dumps({"type": "FeatureCollection", "features": features}, indent=1) + "\n",
        encoding="utf-8")
    return paths


# --------------------------------------------------------------------------
# HTTP


def _handler_for(site: FixtureSite):
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):  # noqa: N802
            page = site.pages.get(self.path)
            if page is None:
                status, ctype, body = 404, "text/html", b"<html><body>Page not found</body></html>\n"
            else:
                status, ctype, body = page
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            logger.debug("fixture site: " + fmt, *args)

    return Handler


@contextlib.contextmanager
def serve_site(site: FixtureSite, host: str = "127.0.0.1", port: int = 0):
    """Serve ``site`` in a background thread; yields the base URL."""
    server = ThreadingHTTPServer((host, port), _handler_for(site))
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://{host}:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m rentscrape.fixture_site",
                                     description="Serve a synthetic listing site on localhost.")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--seed", type=int, default=2014)
    parser.add_argument("--bundle", help="also write reference tables into this directory")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    site = generate_site(seed=args.seed)
    if args.bundle:
        write_reference_bundle(site, args.bundle)
    with serve_site(site, port=args.port) as url:
        regions = ",".join(p.region for p in site.regions)
        print(f"serving {len(site.pages)} pages at {url}")
        print(f"index template: {site.index_template(url)}  regions: {regions}")
        try:
            threading.Event().wait()
        except KeyboardInterrupt:
            pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
