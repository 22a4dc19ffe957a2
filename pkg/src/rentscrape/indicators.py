"""Market indicators computed over cleaned listings.

All medians and quantiles use ``pipeline.percentile`` so every number in a
report follows the same interpolation rule. Values are carried unrounded;
rounding happens only in the ``display_*`` helpers.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from . import kernels
from .pipeline import as_listing, interquartile_range, percentile, sorted_array

logger = logging.getLogger(__name__)

NATIONAL_MEDIAN_RENT = 1145.0
FMR_BEDROOMS = (1, 2, 3, 4)
WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
DEFAULT_GRID_POINTS = 512


class IndicatorError(ValueError):
    pass


def _median(values) -> Optional[float]:
    arr = sorted_array(values)
    return percentile(arr, 50) if len(arr) else None


# --------------------------------------------------------------------------
# regional summary


@dataclass(frozen=True)
class RegionReport:
    area_id: str
    median_rent: float
    median_sqft: float
    median_rpsf: float
    rent_proportion: Optional[float]
    rental_power: Optional[float]
    listing_count: int

    @property
    def display_rent_proportion(self) -> Optional[float]:
        return None if self.rent_proportion is None else round(self.rent_proportion, 2)

    @property
    def display_rental_power(self) -> Optional[int]:
        # Whole square feet that the median rent actually buys.
        return None if self.rental_power is None else math.floor(self.rental_power)


def region_indicators(area_id: str, median_rent: float, median_sqft: float, median_rpsf: float,
                      listing_count: int, median_income: Optional[float],
                      national_median_rent: float = NATIONAL_MEDIAN_RENT) -> RegionReport:
    """Rent proportion and rental power from already-computed medians."""
    proportion = None
    if median_income and median_income > 0:
        proportion = median_rent / (median_income / 12)
    else:
        logger.warning("%s: no median income; rent proportion omitted", area_id)
    power = national_median_rent / median_rpsf if median_rpsf and median_rpsf > 0 else None
    return RegionReport(area_id, median_rent, median_sqft, median_rpsf, proportion, power, listing_count)


def region_summary(listings: Iterable, acs, national_median_rent: float = NATIONAL_MEDIAN_RENT,
                   area_id: Optional[str] = None) -> RegionReport:
    listings = [as_listing(l) for l in listings]
    if not listings:
        raise IndicatorError("region has no listings")
    if area_id is None:
        area_id = acs.area_id if acs is not None else listings[0].region
    return region_indicators(
        area_id,
        median_rent=_median(l.rent for l in listings),
        median_sqft=_median(l.sqft for l in listings),
        median_rpsf=_median(l.rent_per_sqft for l in listings),
        listing_count=len(listings),
        median_income=acs.median_household_income if acs is not None else None,
        national_median_rent=national_median_rent,
    )


# --------------------------------------------------------------------------
# FMR affordability


@dataclass(frozen=True)
class FmrReport:
    area_id: str
    at_or_below: dict  # bedrooms -> count with rent <= FMR
    counts: dict  # bedrooms -> listings with an FMR to compare against

    def proportion(self, bedrooms: int) -> Optional[float]:
        n = self.counts.get(bedrooms, 0)
        return self.at_or_below[bedrooms] / n if n else None

    @property
    def proportions(self) -> dict:
        return {b: self.proportion(b) for b in FMR_BEDROOMS}

    @property
    def pooled(self) -> Optional[float]:
        n = sum(self.counts.values())
        return sum(self.at_or_below.values()) / n if n else None


def fmr_proportions(listings: Iterable, fmr: dict, area_id: str,
                    diagnostics: Optional[list] = None) -> FmrReport:
    """Share of 1-4 bedroom listings renting at or below the area's FMR.

    ``fmr`` is keyed by (area_id, bedrooms). A bedroom count without an FMR
    is left out of both its own column and the pooled share.
    """
    diagnostics = diagnostics if diagnostics is not None else []
    by_beds = defaultdict(list)
    for listing in listings:
        if listing.bedrooms in FMR_BEDROOMS and listing.rent is not None:
            by_beds[listing.bedrooms].append(listing.rent)
    at, counts = {}, {}
    for beds in FMR_BEDROOMS:
        rec = fmr.get((area_id, beds))
        if rec is None:
            if by_beds.get(beds):
                diagnostics.append(f"{area_id}: no FMR for {beds} bedrooms")
                logger.warning(diagnostics[-1])
            continue
        limit = rec.fmr
        rents = by_beds.get(beds, [])
        at[beds] = sum(1 for r in rents if r <= limit)
        counts[beds] = len(rents)
    return FmrReport(area_id, at, counts)


def fmr_total(reports: Iterable[FmrReport], area_id: str = "ALL") -> FmrReport:
    """Combine per-area reports by summing their counts."""
    at = defaultdict(int)
    counts = defaultdict(int)
    for rep in reports:
        for beds, n in rep.counts.items():
            counts[beds] += n
            at[beds] += rep.at_or_below[beds]
    return FmrReport(area_id, dict(at), dict(counts))


# --------------------------------------------------------------------------
# HUD ratios


@dataclass(frozen=True)
class RatioReport:
    area_id: str
    ratios: dict  # bedrooms -> corpus median / HUD median


def bedroom_medians(groups: dict) -> dict:
    """(area_id, bedrooms) -> median rent, for 1-4 bedroom listings."""
    out = {}
    for area_id, listings in groups.items():
        rents = defaultdict(list)
        for l in listings:
            if l.bedrooms in FMR_BEDROOMS and l.rent is not None:
                rents[l.bedrooms].append(l.rent)
        for beds, values in rents.items():
            out[(area_id, beds)] = _median(values)
    return out


def hud_ratios(corpus_medians: dict, hud: dict):
    """Per-area ratio rows and the unweighted per-bedroom mean across areas.

    Both mappings are keyed by (area_id, bedrooms); hud values may be plain
    numbers or records with a ``median_rent`` attribute.
    """
    rows = defaultdict(dict)
    for key in sorted(corpus_medians):
        area_id, beds = key
        if beds not in FMR_BEDROOMS or key not in hud:
            continue
        ref = hud[key]
        ref = getattr(ref, "median_rent", ref)
        rows[area_id][beds] = corpus_medians[key] / ref
    reports = [RatioReport(a, rows[a]) for a in sorted(rows)]
    return reports, ratio_means(reports)


def ratio_means(reports: Sequence[RatioReport]) -> dict:
    means = {}
    for beds in FMR_BEDROOMS:
        values = [r.ratios[beds] for r in reports if beds in r.ratios]
        means[beds] = math.fsum(values) / len(values) if values else None
    return means


# --------------------------------------------------------------------------
# correlation


class CorrelationResult(NamedTuple):
    r: float
    p_value: float
    n: int
    bedrooms: Optional[int] = None


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    if n != len(ys):
        raise IndicatorError("paired samples differ in length")
    if n < 3:
        raise IndicatorError("insufficient data for correlation")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise IndicatorError("insufficient data for correlation")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def correlate(pairs: Sequence, bedrooms: Optional[int] = None) -> CorrelationResult:
    """Pearson r with a two-sided p-value from the t distribution on n - 2 df."""
    pairs = list(pairs)
    xs = [float(p[0]) for p in pairs]
    ys = [float(p[1]) for p in pairs]
    r = pearson_r(xs, ys)
    n = len(pairs)
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = float(min(1.0, 2 * stats.t.sf(abs(t), n - 2)))
    return CorrelationResult(r, p, n, bedrooms)


# --------------------------------------------------------------------------
# weekday profile


class WeekdayEntry(NamedTuple):
    day: str
    median_rpsf: Optional[float]
    listing_count: int
    mean_count: float


@dataclass(frozen=True)
class WeekdayProfile:
    entries: tuple
    first_date: Optional[dt.date] = None
    last_date: Optional[dt.date] = None

    def entry(self, day: str) -> WeekdayEntry:
        return self.entries[WEEKDAYS.index(day)]


def weekday_occurrences(first: dt.date, last: dt.date) -> list:
    """How many calendar dates in [first, last] fall on each weekday (Mon=0)."""
    span = (last - first).days + 1
    full, rest = divmod(span, 7)
    out = [full] * 7
    for k in range(rest):
        out[(first.weekday() + k) % 7] += 1
    return out


def weekday_profile(listings: Iterable) -> WeekdayProfile:
    listings = [as_listing(l) for l in listings]
    rpsf = defaultdict(list)
    counts = [0] * 7
    dates = []
    for l in listings:
        day = l.posted_at.date()
        dates.append(day)
        wd = day.weekday()
        counts[wd] += 1
        if l.rent_per_sqft is not None:
            rpsf[wd].append(l.rent_per_sqft)
    if not dates:
        entries = tuple(WeekdayEntry(d, None, 0, 0.0) for d in WEEKDAYS)
        return WeekdayProfile(entries)
    first, last = min(dates), max(dates)
    occurrences = weekday_occurrences(first, last)
    entries = []
    for wd, name in enumerate(WEEKDAYS):
        occ = occurrences[wd]
        entries.append(WeekdayEntry(
            name,
            _median(rpsf[wd]) if rpsf[wd] else None,
            counts[wd],
            counts[wd] / occ if occ else 0.0,
        ))
    return WeekdayProfile(tuple(entries), first, last)


# --------------------------------------------------------------------------
# density


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        d = self.density
        return float(np.sum(np.diff(self.grid) * (d[1:] + d[:-1])) / 2)


def silverman_bandwidth(sorted_values: np.ndarray) -> float:
    n = len(sorted_values)
    sigma = float(np.std(sorted_values, ddof=1))
    iqr = interquartile_range(sorted_values)
    spread = min(sigma, iqr / 1.34) if iqr > 0 else sigma
    return 0.9 * spread * n ** -0.2


def density_profile(values: Iterable[float], points: int = DEFAULT_GRID_POINTS,
                    pad: float = 0.0, bandwidth: Optional[float] = None,
                    use_numba: Optional[bool] = None) -> DensityCurve:
    """Gaussian kernel density on a uniform grid over [min - pad*h, max + pad*h]."""
    data = sorted_array(values)
    if len(data) < 2 or data[0] == data[-1]:
        raise IndicatorError("degenerate distribution")
    if points < 2:
        raise IndicatorError("grid needs at least 2 points")
    h = bandwidth if bandwidth is not None else silverman_bandwidth(data)
    grid = np.linspace(data[0] - pad * h, data[-1] + pad * h, points)
    density = kernels.gaussian_kde(data, grid, h, use_numba=use_numba)
    return DensityCurve(grid, density, h)


# --------------------------------------------------------------------------
# quintiles


class QuintileBreaks(NamedTuple):
    q20: float
    q40: float
    q60: float
    q80: float


def quintile_breaks(values: Iterable[float]) -> QuintileBreaks:
    data = sorted_array(values)
    if not len(data):
        raise IndicatorError("no values for quintile breaks")
    return QuintileBreaks(*(percentile(data, p) for p in (20, 40, 60, 80)))


def assign_quintile(value: float, breaks: QuintileBreaks) -> int:
    """1-based quintile; each break is the inclusive upper edge of its bucket."""
    for i, edge in enumerate(breaks):
        if value <= edge:
            return i + 1
    return 5
