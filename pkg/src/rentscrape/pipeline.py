"""Five-stage cleaning: original -> unique -> thorough -> filtered -> geolocated.

Every stage output is sorted by listing_id (after dedup ids are unique), so
results do not depend on input order. Sums go through ``math.fsum``, which is
exactly rounded and therefore order independent as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .records import RawListing, dumps

STAGES = ("original", "unique", "thorough", "filtered", "geolocated")
DEFAULT_P_LOW = 0.2
DEFAULT_P_HIGH = 99.8


@dataclass(frozen=True)
class Listing(RawListing):
    rent_per_sqft: Optional[float] = field(default=None, init=False, compare=False)

    def __post_init__(self):
        super().__post_init__()
        rpsf = None
        if self.rent is not None and self.sqft is not None:
            rpsf = self.rent / self.sqft
        object.__setattr__(self, "rent_per_sqft", rpsf)


def as_listing(raw: RawListing) -> Listing:
    if isinstance(raw, Listing):
        return raw
    return Listing(**{name: getattr(raw, name) for name in raw.__dataclass_fields__})


# --------------------------------------------------------------------------
# percentiles


def _decimal_rank(p) -> Fraction:
    return Fraction(repr(float(p))) if not isinstance(p, int) else Fraction(p)


def _exact_percentile(values: Sequence[float], p: float):
    n = len(values)
    if n == 0:
        raise ValueError("no data")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile rank {p} outside [0, 100]")
    h = Fraction(n - 1) * _decimal_rank(p) / 100
    lo = h.numerator // h.denominator
    frac = h - lo
    base = Fraction(float(values[lo]))
    if lo + 1 >= n or frac == 0:
        return base
    return base + frac * (Fraction(float(values[lo + 1])) - base)


def percentile(values: Sequence[float], p: float) -> float:
    """Linear interpolation between closest order statistics.

    ``values`` must already be sorted ascending. With n values and
    h = (n - 1) * p / 100 the result is v[floor(h)] + frac(h) * (v[floor(h)+1] - v[floor(h)]).
    The rank is read as the decimal it was written as (99.8, not the nearest
    binary double) and the interpolation is done in exact rationals and
    rounded once, so the result is the correctly rounded value of the formula.
    """
    return float(_exact_percentile(values, p))


def interquartile_range(values: Sequence[float]) -> float:
    """75th minus 25th percentile of sorted ``values``, rounded once."""
    return float(_exact_percentile(values, 75) - _exact_percentile(values, 25))


def sorted_array(values: Iterable) -> np.ndarray:
    return np.sort(np.fromiter(values, dtype=np.float64))


# --------------------------------------------------------------------------
# stages


def _time_key(listing: RawListing):
    collected = listing.collected_at.timestamp() if listing.collected_at else math.inf
    posted = listing.posted_at.timestamp() if listing.posted_at else math.inf
    return (collected, posted)


def _precedes(a: RawListing, b: RawListing) -> bool:
    ka, kb = _time_key(a), _time_key(b)
    if ka != kb:
        return ka < kb
    return dumps(a) < dumps(b)


def dedup(listings: Iterable[RawListing]) -> list:
    """One listing per listing_id.

    The survivor is the earliest collected copy, then the earliest posted,
    then the one whose serialized record sorts first.
    """
    best = {}
    for listing in listings:
        current = best.get(listing.listing_id)
        if current is None or _precedes(listing, current):
            best[listing.listing_id] = listing
    return [best[k] for k in sorted(best)]


def to_thorough(listings: Iterable[RawListing]) -> list:
    return [as_listing(l) for l in listings if l.rent is not None and l.sqft is not None]


@dataclass(frozen=True)
class FilterBounds:
    p_low: float
    p_high: float
    rent_min: float
    rent_max: float
    sqft_min: float
    sqft_max: float
    rpsf_min: float
    rpsf_max: float

    def __post_init__(self):
        for lo, hi in ((self.rent_min, self.rent_max), (self.sqft_min, self.sqft_max),
                       (self.rpsf_min, self.rpsf_max)):
            if lo > hi:
                raise ValueError(f"bound minimum {lo} exceeds maximum {hi}")

    def admits(self, listing: Listing) -> bool:
        return (
            self.rent_min <= listing.rent <= self.rent_max
            and self.sqft_min <= listing.sqft <= self.sqft_max
            and self.rpsf_min <= listing.rent_per_sqft <= self.rpsf_max
        )


# Nationwide bounds from the 2014 corpus, for --fixed-bounds.
TABLE2_BOUNDS = FilterBounds(
    p_low=DEFAULT_P_LOW, p_high=DEFAULT_P_HIGH,
    rent_min=189, rent_max=10287,
    sqft_min=220, sqft_max=5200,
    rpsf_min=0.10, rpsf_max=12.63,
)


def compute_bounds(thorough: Sequence[Listing], p_low: float = DEFAULT_P_LOW,
                   p_high: float = DEFAULT_P_HIGH) -> FilterBounds:
    if not thorough:
        raise ValueError("cannot compute bounds from an empty corpus")
    if not p_low < p_high:
        raise ValueError("p_low must be below p_high")
    thorough = [as_listing(l) for l in thorough]
    rent = sorted_array(l.rent for l in thorough)
    sqft = sorted_array(l.sqft for l in thorough)
    rpsf = sorted_array(l.rent_per_sqft for l in thorough)
    return FilterBounds(
        p_low=p_low, p_high=p_high,
        rent_min=percentile(rent, p_low), rent_max=percentile(rent, p_high),
        sqft_min=percentile(sqft, p_low), sqft_max=percentile(sqft, p_high),
        rpsf_min=percentile(rpsf, p_low), rpsf_max=percentile(rpsf, p_high),
    )


def apply_filter(thorough: Iterable[Listing], bounds: FilterBounds) -> list:
    """Keep listings inside all three bounds; both ends inclusive."""
    return [l for l in thorough if bounds.admits(as_listing(l))]


def to_geolocated(listings: Iterable[RawListing]) -> list:
    return [l for l in listings if l.latitude is not None and l.longitude is not None]


# --------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class StageStats:
    stage: str
    region_count: int
    listing_count: int
    median_rent: Optional[float] = None
    median_sqft: Optional[float] = None
    median_rpsf: Optional[float] = None
    mean_rpsf: Optional[float] = None
    rpsf_iqr: Optional[float] = None
    rpsf_sd: Optional[float] = None
    mean_bedrooms: Optional[float] = None


STATS_COLUMNS = tuple(StageStats.__dataclass_fields__)


def mean(values: Sequence[float]) -> Optional[float]:
    if len(values) == 0:
        return None
    return math.fsum(values) / len(values)


def population_sd(values: Sequence[float]) -> Optional[float]:
    if len(values) == 0:
        return None
    m = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - m) * (v - m) for v in values) / len(values))


def _median(values) -> Optional[float]:
    return percentile(values, 50) if len(values) else None


def stage_stats(listings: Sequence[RawListing], stage: str) -> StageStats:
    listings = [as_listing(l) for l in listings]
    if not listings:
        return StageStats(stage=stage, region_count=0, listing_count=0)
    rent = sorted_array(l.rent for l in listings if l.rent is not None)
    sqft = sorted_array(l.sqft for l in listings if l.sqft is not None)
    rpsf = sorted_array(l.rent_per_sqft for l in listings if l.rent_per_sqft is not None)
    beds = [float(l.bedrooms) for l in listings if l.bedrooms is not None]
    rpsf_list = rpsf.tolist()
    return StageStats(
        stage=stage,
        region_count=len({l.region for l in listings}),
        listing_count=len(listings),
        median_rent=_median(rent),
        median_sqft=_median(sqft),
        median_rpsf=_median(rpsf),
        mean_rpsf=mean(rpsf_list),
        rpsf_iqr=interquartile_range(rpsf) if len(rpsf) else None,
        rpsf_sd=population_sd(rpsf_list),
        mean_bedrooms=mean(beds),
    )


# --------------------------------------------------------------------------
# orchestration


@dataclass
class PipelineResult:
    stages: dict
    bounds: FilterBounds

    def stats(self) -> list:
        return [stage_stats(self.stages[name], name) for name in STAGES]


def run_pipeline(raw: Iterable[RawListing], bounds: Optional[FilterBounds] = None,
                 p_low: float = DEFAULT_P_LOW, p_high: float = DEFAULT_P_HIGH) -> PipelineResult:
    """Run all five stages. Bounds are recomputed from the thorough set unless given."""
    original = sorted((as_listing(l) for l in raw), key=lambda l: (l.listing_id, _time_key(l), dumps(l)))
    unique = dedup(original)
    thorough = to_thorough(unique)
    if bounds is None:
        bounds = compute_bounds(thorough, p_low, p_high)
    filtered = apply_filter(thorough, bounds)
    geolocated = to_geolocated(filtered)
    stages = dict(zip(STAGES, (original, unique, thorough, filtered, geolocated)))
    return PipelineResult(stages=stages, bounds=bounds)
