"""Government reference tables and the region -> census area crosswalk.

Crosswalk file: blank-line separated sections of ``key = value`` lines.
``region`` may repeat inside a section to merge several listing-site regions
into one area. Other keys: ``area`` (required), ``kind`` (MSA or CSA),
``fmr_excluded`` (true/false) and an optional display ``name``.

CSV headers:
    fmr.csv         area_id,bedrooms,fmr
    hud_median.csv  area_id,bedrooms,median_rent
    acs.csv         area_id,median_income,population
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, NamedTuple, Optional

logger = logging.getLogger(__name__)

AREA_KINDS = ("MSA", "CSA")


class RefDataError(ValueError):
    pass


@dataclass(frozen=True)
class AreaEntry:
    area_id: str
    regions: tuple
    kind: str = "MSA"
    fmr_excluded: bool = False
    name: str = ""


@dataclass(frozen=True)
class Crosswalk:
    areas: dict
    region_to_area: dict = field(repr=False)

    def area(self, area_id) -> Optional[AreaEntry]:
        return self.areas.get(area_id)

    def merge_groups(self) -> dict:
        return {a.area_id: a.regions for a in self.areas.values() if len(a.regions) > 1}


def _parse_bool(text, where):
    value = text.strip().lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise RefDataError(f"{where}: expected true/false, got {text!r}")


def _sections(lines: Iterable[str]):
    block = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if block:
                yield block
                block = []
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise RefDataError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        block.append((lineno, key.strip().lower(), value.strip()))
    if block:
        yield block


def parse_crosswalk(text: str) -> Crosswalk:
    areas = {}
    region_to_area = {}
    for block in _sections(text.splitlines()):
        first = block[0][0]
        regions, area_id, kind, excluded, name = [], None, "MSA", False, ""
        for lineno, key, value in block:
            where = f"line {lineno}"
            if key == "region":
                regions.extend(r.strip() for r in value.split(",") if r.strip())
            elif key == "area":
                area_id = value
            elif key == "kind":
                kind = value.upper()
                if kind not in AREA_KINDS:
                    raise RefDataError(f"{where}: unknown area kind {value!r}")
            elif key == "fmr_excluded":
                excluded = _parse_bool(value, where)
            elif key == "name":
                name = value
            else:
                raise RefDataError(f"{where}: unknown key {key!r}")
        if not area_id:
            raise RefDataError(f"section at line {first}: missing 'area'")
        if not regions:
            raise RefDataError(f"section at line {first}: no 'region' entries")
        for region in regions:
            if region in region_to_area:
                raise RefDataError(f"duplicate crosswalk entry for region {region!r}")
            region_to_area[region] = area_id
        prior = areas.get(area_id)
        if prior is not None:
            if (prior.kind, prior.fmr_excluded) != (kind, excluded):
                raise RefDataError(f"area {area_id!r} declared twice with different flags")
            regions = list(prior.regions) + regions
            name = prior.name or name
        areas[area_id] = AreaEntry(area_id, tuple(regions), kind, excluded, name)
    return Crosswalk(areas=areas, region_to_area=region_to_area)


def load_crosswalk(path) -> Crosswalk:
    with open(path, encoding="utf-8") as fh:
        return parse_crosswalk(fh.read())


def default_crosswalk() -> Crosswalk:
    text = (resources.files("rentscrape") / "data" / "crosswalk_2014.txt").read_text("utf-8")
    return parse_crosswalk(text)


def resolve_region(crosswalk: Crosswalk, region: str) -> Optional[str]:
    return crosswalk.region_to_area.get(region)


class JoinDiagnostic(NamedTuple):
    total: int
    joined: int
    unmapped: int
    unmapped_regions: tuple


def join_listings(listings, crosswalk: Crosswalk):
    """Group listings by resolved area_id. Returns (groups, diagnostic)."""
    groups = {}
    missing = Counter()
    total = 0
    for listing in listings:
        total += 1
        area = resolve_region(crosswalk, listing.region)
        if area is None:
            missing[listing.region] += 1
            continue
        groups.setdefault(area, []).append(listing)
    unmapped = sum(missing.values())
    diag = JoinDiagnostic(total, total - unmapped, unmapped, tuple(sorted(missing)))
    if unmapped:
        logger.warning("%d of %d listings in unmapped regions: %s",
                       unmapped, total, ", ".join(diag.unmapped_regions))
    return dict(sorted(groups.items())), diag


# --------------------------------------------------------------------------
# CSV tables


class FmrRecord(NamedTuple):
    area_id: str
    bedrooms: int
    fmr: float


class HudMedianRent(NamedTuple):
    area_id: str
    bedrooms: int
    median_rent: float


class AcsRecord(NamedTuple):
    area_id: str
    median_household_income: float
    population: int


def _read_csv(path, required):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise RefDataError(f"{path}: missing required columns: {', '.join(missing)}")
        reader.fieldnames = header
        rows = [(i, row) for i, row in enumerate(reader, 2)]
    if not rows:
        logger.warning("%s: no data rows", path)
    return rows


def _number(row, column, rowno, path, kind=float):
    text = (row.get(column) or "").strip().replace(",", "")
    try:
        value = kind(text)
    except ValueError:
        raise RefDataError(f"{path}: row {rowno}: non-numeric {column} {text!r}") from None
    return value


def _positive(value, column, rowno, path):
    if not value > 0:
        raise RefDataError(f"{path}: row {rowno}: {column} must be positive")
    return value


def load_fmr(path) -> dict:
    table = {}
    for rowno, row in _read_csv(path, ("area_id", "bedrooms", "fmr")):
        beds = _number(row, "bedrooms", rowno, path, int)
        if not 0 <= beds <= 4:
            raise RefDataError(f"{path}: row {rowno}: bedrooms must be 0-4")
        fmr = _positive(_number(row, "fmr", rowno, path), "fmr", rowno, path)
        rec = FmrRecord(row["area_id"].strip(), beds, fmr)
        table[(rec.area_id, rec.bedrooms)] = rec
    return table


def load_hud_medians(path) -> dict:
    table = {}
    for rowno, row in _read_csv(path, ("area_id", "bedrooms", "median_rent")):
        beds = _number(row, "bedrooms", rowno, path, int)
        if not 1 <= beds <= 4:
            raise RefDataError(f"{path}: row {rowno}: bedrooms must be 1-4")
        rent = _positive(_number(row, "median_rent", rowno, path), "median_rent", rowno, path)
        rec = HudMedianRent(row["area_id"].strip(), beds, rent)
        table[(rec.area_id, rec.bedrooms)] = rec
    return table


def load_acs(path) -> dict:
    table = {}
    for rowno, row in _read_csv(path, ("area_id", "median_income", "population")):
        income = _positive(_number(row, "median_income", rowno, path), "median_income", rowno, path)
        pop = _positive(_number(row, "population", rowno, path, int), "population", rowno, path)
        rec = AcsRecord(row["area_id"].strip(), income, pop)
        table[rec.area_id] = rec
    return table


def default_acs_path():
    return resources.files("rentscrape") / "data" / "acs_2014.csv"


# --------------------------------------------------------------------------
# sample selection


def select_sample(crosswalk: Crosswalk, acs: dict, region_counts: dict,
                  top_population: int = 50, top_listings: int = 50) -> set:
    """Areas that are among the most populous, or hold a top region by listings.

    Ties are broken by id so the selection is deterministic.
    """
    by_pop = sorted((a for a in crosswalk.areas if a in acs),
                    key=lambda a: (-acs[a].population, a))
    sampled = set(by_pop[:top_population])
    by_listings = sorted(region_counts, key=lambda r: (-region_counts[r], r))
    for region in by_listings[:top_listings]:
        area = resolve_region(crosswalk, region)
        if area is not None:
            sampled.add(area)
    return sampled
