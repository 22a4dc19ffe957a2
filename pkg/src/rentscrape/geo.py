"""Spatial join of listings to census tracts, tract medians, GeoJSON layers.

Geometry is planar in (lon, lat) degrees. Containment uses the even-odd rule
with points on any edge counted as inside; when several tracts claim a point
the lexicographically smallest tract_id wins.
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .indicators import QuintileBreaks, assign_quintile
from .pipeline import as_listing, percentile, sorted_array

logger = logging.getLogger(__name__)

TRACT_ID_KEYS = ("tract_id", "GEOID", "GEOID10", "GEOID20")
MAX_CELLS_PER_AXIS = 1024


@dataclass(frozen=True)
class TractPolygon:
    """One exterior ring plus holes. A multipart tract is several of these."""

    tract_id: str
    rings: tuple  # ((lon, lat), ...) per ring; rings[0] is the exterior
    bbox: tuple = field(init=False, compare=False)

    def __post_init__(self):
        rings = tuple(tuple((float(x), float(y)) for x, y in ring) for ring in self.rings)
        object.__setattr__(self, "rings", rings)
        pts = [p for ring in rings for p in ring]
        if pts:
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            bbox = (min(xs), min(ys), max(xs), max(ys))
        else:
            bbox = (math.nan,) * 4
        object.__setattr__(self, "bbox", bbox)

    @property
    def exterior(self):
        return self.rings[0]

    @property
    def holes(self):
        return self.rings[1:]


def ring_problem(ring) -> Optional[str]:
    if len(ring) < 4:
        return f"ring has {len(ring)} vertices, need at least 4"
    if ring[0] != ring[-1]:
        return "ring is not closed"
    if not all(math.isfinite(v) for p in ring for v in p):
        return "ring has non-finite coordinates"
    return None


def polygon_problem(poly: TractPolygon) -> Optional[str]:
    if not poly.tract_id:
        return "missing tract id"
    if not poly.rings:
        return "no rings"
    for i, ring in enumerate(poly.rings):
        why = ring_problem(ring)
        if why:
            return f"ring {i}: {why}"
    return None


def contains(poly: TractPolygon, xs, ys, use_numba=None) -> np.ndarray:
    """Boolean mask of points inside ``poly`` (edges inclusive, holes excluded)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    ext = np.asarray(poly.exterior, dtype=np.float64)
    inside = kernels.ring_classify(xs, ys, ext[:, 0], ext[:, 1], use_numba) != kernels.OUTSIDE
    for hole in poly.holes:
        if not inside.any():
            break
        h = np.asarray(hole, dtype=np.float64)
        inside &= kernels.ring_classify(xs, ys, h[:, 0], h[:, 1], use_numba) != kernels.INSIDE
    return inside


# --------------------------------------------------------------------------
# index


class TractIndex:
    """Fixed-resolution grid of cells, each listing the polygons whose bbox touches it."""

    def __init__(self, polygons: Sequence[TractPolygon], cells_per_axis: Optional[int] = None):
        # sorted by tract id so the first claimant of a point is the smallest id
        self.polygons = tuple(sorted(polygons, key=lambda p: (p.tract_id, p.rings)))
        self._cells = defaultdict(list)
        if not self.polygons:
            self.origin = (0.0, 0.0)
            self.cell_size = (1.0, 1.0)
            self.shape = (0, 0)
            self.extent = (0.0, 0.0, -1.0, -1.0)
            return
        boxes = np.array([p.bbox for p in self.polygons], dtype=np.float64)
        x0, y0 = boxes[:, 0].min(), boxes[:, 1].min()
        x1, y1 = boxes[:, 2].max(), boxes[:, 3].max()
        if cells_per_axis is None:
            cells_per_axis = int(min(MAX_CELLS_PER_AXIS, max(1, math.ceil(2 * math.sqrt(len(boxes))))))
        self.origin = (float(x0), float(y0))
        self.extent = (float(x0), float(y0), float(x1), float(y1))
        self.cell_size = (float(x1 - x0) / cells_per_axis or 1.0,
                          float(y1 - y0) / cells_per_axis or 1.0)
        self.shape = (cells_per_axis, cells_per_axis)
        for k, (bx0, by0, bx1, by1) in enumerate(boxes):
            i0, j0 = self._cell(bx0, by0)
            i1, j1 = self._cell(bx1, by1)
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    self._cells[(i, j)].append(k)

    def __len__(self):
        return len(self.polygons)

    def _cell(self, x, y):
        nx, ny = self.shape
        i = math.floor((x - self.origin[0]) / self.cell_size[0])
        j = math.floor((y - self.origin[1]) / self.cell_size[1])
        return min(max(i, 0), nx - 1), min(max(j, 0), ny - 1)

    def _in_grid(self, x, y):
        x0, y0, x1, y1 = self.extent
        return x0 <= x <= x1 and y0 <= y <= y1

    def candidates(self, lon: float, lat: float) -> list:
        """Polygons whose bbox contains the point, in tract_id order."""
        if not self._in_grid(lon, lat):
            return []
        out = []
        for k in self._cells.get(self._cell(lon, lat), ()):
            bx0, by0, bx1, by1 = self.polygons[k].bbox
            if bx0 <= lon <= bx1 and by0 <= lat <= by1:
                out.append(self.polygons[k])
        return out

    def locate_many(self, lons, lats, use_numba=None) -> list:
        """tract_id (or None) for each point."""
        lons = np.asarray(lons, dtype=np.float64)
        lats = np.asarray(lats, dtype=np.float64)
        n = lons.shape[0]
        result = [None] * n
        if not n or not self.polygons:
            return result
        nx, ny = self.shape
        ci = np.floor((lons - self.origin[0]) / self.cell_size[0])
        cj = np.floor((lats - self.origin[1]) / self.cell_size[1])
        x0, y0, x1, y1 = self.extent
        ingrid = (lons >= x0) & (lons <= x1) & (lats >= y0) & (lats <= y1)
        ci = np.clip(np.nan_to_num(ci), 0, nx - 1).astype(np.int64)
        cj = np.clip(np.nan_to_num(cj), 0, ny - 1).astype(np.int64)
        by_cell = defaultdict(list)
        for idx in np.flatnonzero(ingrid).tolist():
            by_cell[(int(ci[idx]), int(cj[idx]))].append(idx)
        # polygon -> points in its cells
        work = defaultdict(list)
        for cell, idxs in by_cell.items():
            for k in self._cells.get(cell, ()):
                work[k].extend(idxs)
        assigned = np.zeros(n, dtype=bool)
        for k in sorted(work):
            idx = np.asarray(work[k], dtype=np.int64)
            idx = idx[~assigned[idx]]
            if not idx.size:
                continue
            poly = self.polygons[k]
            bx0, by0, bx1, by1 = poly.bbox
            x, y = lons[idx], lats[idx]
            keep = (x >= bx0) & (x <= bx1) & (y >= by0) & (y <= by1)
            idx = idx[keep]
            if not idx.size:
                continue
            hit = idx[contains(poly, lons[idx], lats[idx], use_numba)]
            assigned[hit] = True
            for i in hit.tolist():
                result[i] = poly.tract_id
        return result


def build_tract_index(polygons: Iterable[TractPolygon], diagnostics: Optional[list] = None,
                      cells_per_axis: Optional[int] = None) -> TractIndex:
    diagnostics = diagnostics if diagnostics is not None else []
    valid = []
    for poly in polygons:
        why = polygon_problem(poly)
        if why:
            diagnostics.append(f"tract {poly.tract_id or '?'} rejected: {why}")
            logger.warning(diagnostics[-1])
            continue
        valid.append(poly)
    return TractIndex(valid, cells_per_axis)


def locate(point, index: TractIndex) -> Optional[str]:
    """tract_id containing a GeoPoint (latitude, longitude), or None."""
    lat, lon = point
    for poly in index.candidates(lon, lat):
        if contains(poly, [lon], [lat])[0]:
            return poly.tract_id
    return None


# --------------------------------------------------------------------------
# aggregation


class TractAggregate(NamedTuple):
    tract_id: str
    listing_count: int
    median_rpsf: float
    quintile: int


class TractCoverage(NamedTuple):
    total: int
    located: int
    unlocated: int
    suppressed_tracts: int = 0
    suppressed_listings: int = 0


def tract_medians(listings: Iterable, index: TractIndex, breaks: QuintileBreaks,
                  min_count: int = 1):
    """Median rent/ft² per tract. Returns (aggregates, coverage)."""
    listings = [as_listing(l) for l in listings if l.latitude is not None and l.longitude is not None]
    tracts = index.locate_many([l.longitude for l in listings], [l.latitude for l in listings])
    groups = defaultdict(list)
    unlocated = 0
    for listing, tract in zip(listings, tracts):
        if tract is None:
            unlocated += 1
        else:
            groups[tract].append(listing.rent_per_sqft)
    aggregates = []
    dropped_tracts = dropped = 0
    for tract in sorted(groups):
        values = sorted_array(groups[tract])
        if len(values) < min_count:
            dropped_tracts += 1
            dropped += len(values)
            continue
        med = percentile(values, 50)
        aggregates.append(TractAggregate(tract, len(values), med, assign_quintile(med, breaks)))
    coverage = TractCoverage(len(listings), len(listings) - unlocated, unlocated, dropped_tracts, dropped)
    if unlocated:
        logger.info("%d of %d geolocated listings fell outside every tract", unlocated, len(listings))
    return aggregates, coverage


# --------------------------------------------------------------------------
# GeoJSON


class GeoJSONError(ValueError):
    pass


def _ring_coords(ring):
    return [[x, y] for x, y in ring]


def _tract_id(props):
    for key in TRACT_ID_KEYS:
        value = props.get(key)
        if value not in (None, ""):
            return str(value)
    return None


def tracts_from_geojson(doc: dict, diagnostics: Optional[list] = None) -> list:
    """TractPolygons from a FeatureCollection of Polygon/MultiPolygon features."""
    diagnostics = diagnostics if diagnostics is not None else []
    if doc.get("type") != "FeatureCollection":
        raise GeoJSONError("expected a GeoJSON FeatureCollection")
    out = []
    for n, feature in enumerate(doc.get("features") or []):
        props = feature.get("properties") or {}
        tract = _tract_id(props)
        geom = feature.get("geometry") or {}
        kind = geom.get("type")
        if tract is None:
            diagnostics.append(f"feature {n}: no tract id property")
            continue
        if kind == "Polygon":
            parts = [geom.get("coordinates") or []]
        elif kind == "MultiPolygon":
            parts = geom.get("coordinates") or []
        else:
            diagnostics.append(f"feature {n} ({tract}): unsupported geometry {kind!r}")
            continue
        try:
            polys = [TractPolygon(tract, tuple(tuple(tuple(pt[:2]) for pt in ring) for ring in part))
                     for part in parts]
        except (TypeError, ValueError) as exc:
            diagnostics.append(f"feature {n} ({tract}): bad coordinates: {exc}")
            continue
        for poly in polys:
            why = polygon_problem(poly)
            if why:
                diagnostics.append(f"tract {tract} rejected: {why}")
            else:
                out.append(poly)
    for msg in diagnostics:
        logger.warning(msg)
    return out


def load_tracts(path, diagnostics: Optional[list] = None) -> list:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GeoJSONError(f"{path}: not valid JSON: {exc}") from exc
    return tracts_from_geojson(doc, diagnostics)


def _geometry(parts):
    if len(parts) == 1:
        return {"type": "Polygon", "coordinates": [_ring_coords(r) for r in parts[0].rings]}
    return {"type": "MultiPolygon",
            "coordinates": [[_ring_coords(r) for r in p.rings] for p in parts]}


def tracts_geojson(aggregates: Iterable[TractAggregate], polygons: Iterable[TractPolygon]) -> dict:
    parts = defaultdict(list)
    for poly in sorted(polygons, key=lambda p: (p.tract_id, p.rings)):
        parts[poly.tract_id].append(poly)
    features = []
    for agg in sorted(aggregates):
        geometry = _geometry(parts[agg.tract_id]) if parts.get(agg.tract_id) else None
        features.append({
            "type": "Feature",
            "geometry": geometry,
            "properties": {
                "tract_id": agg.tract_id,
                "median_rpsf": agg.median_rpsf,
                "listing_count": agg.listing_count,
                "quintile": agg.quintile,
            },
        })
    return {"type": "FeatureCollection", "features": features}


def points_geojson(listings: Iterable, breaks: Optional[QuintileBreaks] = None) -> dict:
    features = []
    listings = sorted((as_listing(l) for l in listings), key=lambda l: l.listing_id)
    for l in listings:
        if l.latitude is None or l.longitude is None:
            continue
        rpsf = l.rent_per_sqft
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [l.longitude, l.latitude]},
            "properties": {
                "listing_id": l.listing_id,
                "rent": l.rent,
                "sqft": l.sqft,
                "rpsf": rpsf,
                "quintile": assign_quintile(rpsf, breaks) if breaks and rpsf is not None else None,
            },
        })
    return {"type": "FeatureCollection", "features": features}


def export_geojson(items: Sequence, polygons: Optional[Iterable[TractPolygon]] = None,
                   breaks: Optional[QuintileBreaks] = None) -> dict:
    """Tract layer when given TractAggregates (needs polygons), else a point layer."""
    items = list(items)
    if items and isinstance(items[0], TractAggregate):
        return tracts_geojson(items, polygons or ())
    if not items and polygons is not None:
        return tracts_geojson((), polygons)
    return points_geojson(items, breaks)


def aggregates_from_geojson(doc: dict) -> list:
    out = []
    for feature in doc.get("features") or []:
        p = feature.get("properties") or {}
        out.append(TractAggregate(str(p["tract_id"]), int(p["listing_count"]),
                                  float(p["median_rpsf"]), int(p["quintile"])))
    return out


def dumps_geojson(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"
