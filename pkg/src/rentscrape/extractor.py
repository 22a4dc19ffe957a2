"""Turn snapshot HTML into RawListing records.

Field locations come from a SelectorSet (XPath expressions in an INI file), so
a layout change means a new selector file rather than new code. Free-text
normalizers are total: any input string yields a value or None, never an
exception.
"""

from __future__ import annotations

import configparser
import logging
import math
import re
from dataclasses import dataclass
from datetime import datetime
from importlib import resources
from typing import Callable, NamedTuple, Optional
from urllib.parse import urljoin

import lxml.etree
import lxml.html

from .records import FIELDS, RawListing

logger = logging.getLogger(__name__)

DEFAULT_SELECTORS = "selectors_2014.ini"

_AMOUNT = r"(\d{1,3}(?:,\d{3})+|\d+)(?:\.\d*)?"
_DOLLAR_RE = re.compile(r"\$\s*" + _AMOUNT)
_BARE_RE = re.compile(r"(?<![\d.,])" + _AMOUNT + r"(?![\d,])")
_AREA_RE = re.compile(
    r"(\d{1,3}(?:,\d{3})+|\d+)\s*"
    r"(?:ft²|ft2|ft\^2|sq\.?\s*ft\.?|sqft|sq\.?\s*feet|square\s+f(?:ee|oo)t)",
    re.IGNORECASE,
)
_BEDROOM_RE = re.compile(r"(\d+)\s*(?:br|bd|bdrm|bed(?:room)?s?)\b", re.IGNORECASE)
_STUDIO_RE = re.compile(r"\bstudio\b", re.IGNORECASE)
_DEGREES_RE = re.compile(r"^\s*[+-]?(?:\d+(?:\.\d*)?|\.\d+)\s*$")
_TZ_COMPACT_RE = re.compile(r"([+-]\d{2})(\d{2})$")
_MAX_DIGITS = 15


class GeoPoint(NamedTuple):
    latitude: float
    longitude: float


class ListingRejected(ValueError):
    """A listing page could not yield a usable record."""

    def __init__(self, url, reason):
        super().__init__(f"{url}: {reason}")
        self.url = url
        self.reason = reason


class ListingRef(NamedTuple):
    listing_id: str
    url: str


# --------------------------------------------------------------------------
# normalizers


def _to_int(digits: str) -> Optional[int]:
    digits = digits.replace(",", "")
    if len(digits) > _MAX_DIGITS:
        return None
    return int(digits)


def normalize_money(text: str) -> Optional[int]:
    """First dollar amount in ``text`` as whole dollars (cents truncated)."""
    if not text:
        return None
    m = _DOLLAR_RE.search(text) or _BARE_RE.search(text)
    if m is None:
        return None
    value = _to_int(m.group(1))
    return value if value else None


def normalize_area(text: str) -> Optional[int]:
    if not text:
        return None
    m = _AREA_RE.search(text)
    if m is None:
        return None
    value = _to_int(m.group(1))
    return value if value else None


def normalize_bedrooms(text: str) -> Optional[int]:
    if not text:
        return None
    m = _BEDROOM_RE.search(text)
    if m is not None:
        return _to_int(m.group(1))
    if _STUDIO_RE.search(text):
        return 0
    return None


def normalize_coordinate(text: str) -> Optional[float]:
    if not text or not _DEGREES_RE.match(text):
        return None
    value = float(text)
    return value if math.isfinite(value) else None


def _geopoint(lat, lon) -> Optional[GeoPoint]:
    if lat is None or lon is None:
        return None
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        return None
    if lat == 0.0 and lon == 0.0:
        return None
    return GeoPoint(lat, lon)


def normalize_coords(lat_text: str, lon_text: str) -> Optional[GeoPoint]:
    """Both values as in-range decimal degrees, else None. (0, 0) counts as absent."""
    return _geopoint(normalize_coordinate(lat_text), normalize_coordinate(lon_text))


def normalize_datetime(text: str) -> Optional[datetime]:
    if not text:
        return None
    text = text.strip().replace(" ", "T", 1)
    if text[-1:] in ("Z", "z"):
        text = text[:-1] + "+00:00"
    text = _TZ_COMPACT_RE.sub(r"\1:\2", text) if "T" in text else text
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        return None


def normalize_text(text: str) -> Optional[str]:
    if not text:
        return None
    out = " ".join(text.split())
    return out or None


def normalize_digits(text: str) -> Optional[str]:
    if not text:
        return None
    m = re.search(r"\d+", text)
    return m.group(0) if m else None


NORMALIZERS: dict = {
    "text": normalize_text,
    "digits": normalize_digits,
    "money": normalize_money,
    "area": normalize_area,
    "bedrooms": normalize_bedrooms,
    "coordinate": normalize_coordinate,
    "datetime": normalize_datetime,
}


# --------------------------------------------------------------------------
# selectors


@dataclass(frozen=True)
class FieldSelector:
    name: str
    xpath: str
    normalizer: str

    @property
    def normalize(self) -> Callable:
        return NORMALIZERS[self.normalizer]


@dataclass(frozen=True)
class SelectorSet:
    name: str
    version: str
    index_listing: str
    index_id: str
    index_url: str
    index_next: Optional[str]
    fields: tuple

    def field(self, name) -> Optional[FieldSelector]:
        for sel in self.fields:
            if sel.name == name:
                return sel
        return None


class SelectorError(ValueError):
    pass


def _check_xpath(expr, where):
    try:
        lxml.etree.XPath(expr)
    except lxml.etree.XPathSyntaxError as exc:
        raise SelectorError(f"{where}: bad XPath {expr!r}: {exc}") from exc


def parse_selectors(text: str) -> SelectorSet:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SelectorError(str(exc)) from exc
    for section in ("selectorset", "index"):
        if not cp.has_section(section):
            raise SelectorError(f"missing [{section}] section")
    index = cp["index"]
    for key in ("listing", "id", "url"):
        if key not in index:
            raise SelectorError(f"[index] lacks {key!r}")
        _check_xpath(index[key], f"[index] {key}")
    if "next" in index:
        _check_xpath(index["next"], "[index] next")
    fields = []
    for section in cp.sections():
        if not section.startswith("field."):
            continue
        name = section[len("field."):]
        if name not in FIELDS:
            raise SelectorError(f"[{section}]: unknown field {name!r}")
        body = cp[section]
        if "xpath" not in body:
            raise SelectorError(f"[{section}] lacks xpath")
        norm = body.get("normalize", "text")
        if norm not in NORMALIZERS:
            raise SelectorError(f"[{section}]: unknown normalizer {norm!r}")
        _check_xpath(body["xpath"], f"[{section}]")
        fields.append(FieldSelector(name, body["xpath"], norm))
    if not any(f.name == "listing_id" for f in fields):
        raise SelectorError("no [field.listing_id] section")
    meta = cp["selectorset"]
    return SelectorSet(
        name=meta.get("name", "unnamed"),
        version=meta.get("version", "0"),
        index_listing=index["listing"],
        index_id=index["id"],
        index_url=index["url"],
        index_next=index.get("next"),
        fields=tuple(fields),
    )


def load_selectors(path) -> SelectorSet:
    with open(path, encoding="utf-8") as fh:
        return parse_selectors(fh.read())


def default_selectors() -> SelectorSet:
    text = (resources.files("rentscrape") / "data" / DEFAULT_SELECTORS).read_text("utf-8")
    return parse_selectors(text)


# --------------------------------------------------------------------------
# parsing


_CHARSET_RE = re.compile(rb"""<meta[^>]+charset=["']?([A-Za-z0-9_.:-]+)""", re.IGNORECASE)


def _parser_for(body: bytes):
    # lxml falls back to latin-1 when the charset is declared late or not at
    # all; valid UTF-8 is nearly always meant as UTF-8.
    try:
        body.decode("utf-8")
        return lxml.html.HTMLParser(encoding="utf-8")
    except UnicodeDecodeError:
        pass
    m = _CHARSET_RE.search(body[:4096])
    encoding = m.group(1).decode("ascii") if m else "cp1252"
    try:
        return lxml.html.HTMLParser(encoding=encoding)
    except LookupError:
        return lxml.html.HTMLParser(encoding="cp1252")


def _document(snapshot):
    body = snapshot.body
    if not body or not body.strip():
        return None
    try:
        return lxml.html.document_fromstring(body, parser=_parser_for(body))
    except (lxml.etree.ParserError, ValueError, LookupError):
        return None


def _first_text(node, expr) -> Optional[str]:
    try:
        hits = node.xpath(expr)
    except lxml.etree.XPathError:
        return None
    if not isinstance(hits, list):
        hits = [hits]
    for hit in hits:
        if isinstance(hit, lxml.etree._Element):
            text = hit.text_content()
        else:
            text = str(hit)
        if text and text.strip():
            return text
    return None


def parse_index(snapshot, selectors: SelectorSet, diagnostics: Optional[list] = None) -> list:
    """Listing references on an index page, in document order, unique by id."""
    diagnostics = diagnostics if diagnostics is not None else []
    doc = _document(snapshot)
    if doc is None:
        diagnostics.append(f"{snapshot.url}: empty or unparseable index page")
        logger.warning(diagnostics[-1])
        return []
    refs = []
    seen = set()
    for node in doc.xpath(selectors.index_listing):
        listing_id = normalize_text(_first_text(node, selectors.index_id) or "")
        href = _first_text(node, selectors.index_url)
        if not listing_id or not href:
            continue
        if listing_id in seen:
            continue
        seen.add(listing_id)
        refs.append(ListingRef(listing_id, urljoin(snapshot.url, href.strip())))
    if not refs:
        diagnostics.append(f"{snapshot.url}: index selector matched no listings")
        logger.warning(diagnostics[-1])
    return refs


def next_index_url(snapshot, selectors: SelectorSet) -> Optional[str]:
    if not selectors.index_next:
        return None
    doc = _document(snapshot)
    if doc is None:
        return None
    href = _first_text(doc, selectors.index_next)
    return urljoin(snapshot.url, href.strip()) if href else None


def extract_fields(doc, selectors: SelectorSet) -> dict:
    """Raw normalized values for every selector that matched."""
    values = {}
    for sel in selectors.fields:
        text = _first_text(doc, sel.xpath)
        if text is None:
            continue
        value = sel.normalize(text)
        if value is not None:
            values[sel.name] = value
    return values


def parse_listing(snapshot, selectors: SelectorSet) -> RawListing:
    """Build a RawListing from a listing page; raise ListingRejected if unusable."""
    if not snapshot.parseable:
        raise ListingRejected(snapshot.url, f"HTTP {snapshot.http_status}")
    doc = _document(snapshot)
    if doc is None:
        raise ListingRejected(snapshot.url, "empty or unparseable page")
    values = extract_fields(doc, selectors)
    if "listing_id" not in values:
        raise ListingRejected(snapshot.url, "no listing id")
    if "posted_at" not in values:
        raise ListingRejected(snapshot.url, "no posting date")
    point = _geopoint(values.pop("latitude", None), values.pop("longitude", None))
    if point is not None:
        values["latitude"], values["longitude"] = point
    values.pop("region", None)
    values.pop("url", None)
    values.pop("collected_at", None)
    return RawListing(
        region=snapshot.region,
        url=snapshot.url,
        collected_at=snapshot.fetched_at,
        **values,
    )


def extract_snapshots(snapshots, selectors: Optional[SelectorSet] = None):
    """Parse every listing snapshot; return (listings, rejects).

    Index and robots snapshots are skipped. Rejects are (url, reason) pairs.
    Listings are sorted by (region, listing_id, collected_at, url).
    """
    selectors = selectors or default_selectors()
    listings, rejects = [], []
    for snap in snapshots:
        if snap.kind != "detail":
            continue
        try:
            listings.append(parse_listing(snap, selectors))
        except ListingRejected as exc:
            logger.info("rejected %s", exc)
            rejects.append((exc.url, exc.reason))
    listings.sort(key=lambda l: (l.region, l.listing_id, l.collected_at.isoformat() if l.collected_at else "", l.url))
    rejects.sort()
    return listings, rejects
