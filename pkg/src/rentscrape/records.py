"""Listing records and the JSON Lines interchange format shared by every stage."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Optional

FIELDS = (
    "listing_id",
    "region",
    "posted_at",
    "title",
    "rent",
    "sqft",
    "bedrooms",
    "latitude",
    "longitude",
    "url",
    "collected_at",
)


class RecordError(ValueError):
    """A listing record line could not be decoded."""


@dataclass(frozen=True)
class RawListing:
    listing_id: str
    region: str
    posted_at: datetime
    title: str = ""
    rent: Optional[int] = None
    sqft: Optional[int] = None
    bedrooms: Optional[int] = None
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    url: str = ""
    collected_at: Optional[datetime] = None

    def __post_init__(self):
        if not self.listing_id:
            raise ValueError("listing_id must be non-empty")
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError(f"{self.listing_id}: latitude and longitude must come together")
        if self.latitude is not None:
            if not (-90.0 <= self.latitude <= 90.0 and -180.0 <= self.longitude <= 180.0):
                raise ValueError(f"{self.listing_id}: coordinates out of range")
        for name in ("rent", "sqft"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{self.listing_id}: {name} must be positive")
        if self.bedrooms is not None and self.bedrooms < 0:
            raise ValueError(f"{self.listing_id}: bedrooms must be >= 0")

    @property
    def has_coords(self) -> bool:
        return self.latitude is not None

    def to_record(self) -> dict:
        """Flat dict in canonical field order; absent fields omitted."""
        out = {}
        for name in FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, datetime):
                value = value.isoformat()
            out[name] = value
        return out


def listing_from_record(record: dict, cls=RawListing):
    unknown = set(record) - set(FIELDS)
    if unknown:
        raise RecordError(f"unknown fields {sorted(unknown)}")
    kwargs = dict(record)
    try:
        for name in ("posted_at", "collected_at"):
            if name in kwargs:
                kwargs[name] = datetime.fromisoformat(kwargs[name])
        for name in ("rent", "sqft", "bedrooms"):
            if name in kwargs and not isinstance(kwargs[name], int):
                raise RecordError(f"{name} must be an integer")
        for name in ("latitude", "longitude"):
            if name in kwargs:
                kwargs[name] = float(kwargs[name])
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RecordError):
            raise
        raise RecordError(str(exc)) from exc


def dumps(listing: RawListing) -> str:
    return json.dumps(listing.to_record(), ensure_ascii=False, separators=(",", ":"))


def write_records(listings: Iterable[RawListing], dest) -> int:
    """Write one record per line to a path or an open text stream."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            return write_records(listings, fh)
    n = 0
    for listing in listings:
        dest.write(dumps(listing))
        dest.write("\n")
        n += 1
    return n


def iter_records(source, cls=RawListing) -> Iterator[RawListing]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_records(fh, cls)
        return
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"line {lineno}: {exc}") from exc
        if not isinstance(record, dict):
            raise RecordError(f"line {lineno}: expected an object")
        try:
            yield listing_from_record(record, cls)
        except RecordError as exc:
            raise RecordError(f"line {lineno}: {exc}") from exc


def read_records(source, cls=RawListing) -> list:
    return list(iter_records(source, cls))
