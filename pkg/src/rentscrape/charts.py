"""Deterministic SVG charts from report rows.

The canvas, margins and tick count are fixed and numbers are formatted with a
fixed precision, so the same rows always produce the same bytes.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 400
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 36
MARGIN_BOTTOM = 60
TICKS = 5
KINDS = ("bar", "scatter", "line")


class ChartError(ValueError):
    pass


def _num(text) -> Optional[float]:
    if text is None:
        return None
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        text = str(text).strip().replace(",", "").lstrip("$")
        if not text:
            return None
        try:
            value = float(text)
        except ValueError:
            return None
    return value if math.isfinite(value) else None


def _f(v: float) -> str:
    out = f"{v:.2f}"
    return "0.00" if out == "-0.00" else out


def _label(v: float) -> str:
    return f"{v:.4g}"


def _domain(values, include_zero=False):
    lo, hi = min(values), max(values)
    if include_zero:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
    if lo == hi:
        pad = abs(lo) * 0.5 or 1.0
        lo, hi = lo - pad, hi + pad
    return lo, hi


class _Frame:
    def __init__(self, xdom, ydom):
        self.x0, self.x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
        self.y0, self.y1 = HEIGHT - MARGIN_BOTTOM, MARGIN_TOP
        self.xdom, self.ydom = xdom, ydom

    def sx(self, v):
        lo, hi = self.xdom
        return self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, v):
        lo, hi = self.ydom
        return self.y0 - (v - lo) / (hi - lo) * (self.y0 - self.y1)


def _axes(frame: _Frame, x_label: str, y_label: str, x_ticks=True) -> list:
    out = [
        f'<line class="axis" x1="{_f(frame.x0)}" y1="{_f(frame.y0)}" x2="{_f(frame.x1)}" y2="{_f(frame.y0)}" stroke="#000"/>',
        f'<line class="axis" x1="{_f(frame.x0)}" y1="{_f(frame.y0)}" x2="{_f(frame.x0)}" y2="{_f(frame.y1)}" stroke="#000"/>',
    ]
    lo, hi = frame.ydom
    for k in range(TICKS + 1):
        v = lo + (hi - lo) * k / TICKS
        y = frame.sy(v)
        out.append(f'<line x1="{_f(frame.x0 - 4)}" y1="{_f(y)}" x2="{_f(frame.x0)}" y2="{_f(y)}" stroke="#000"/>')
        out.append(f'<text x="{_f(frame.x0 - 6)}" y="{_f(y + 4)}" text-anchor="end" font-size="11">{_label(v)}</text>')
    if x_ticks:
        lo, hi = frame.xdom
        for k in range(TICKS + 1):
            v = lo + (hi - lo) * k / TICKS
            x = frame.sx(v)
            out.append(f'<line x1="{_f(x)}" y1="{_f(frame.y0)}" x2="{_f(x)}" y2="{_f(frame.y0 + 4)}" stroke="#000"/>')
            out.append(f'<text x="{_f(x)}" y="{_f(frame.y0 + 16)}" text-anchor="middle" font-size="11">{_label(v)}</text>')
    out.append(f'<text x="{_f((frame.x0 + frame.x1) / 2)}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(x_label)}</text>')
    out.append(f'<text x="16" y="{_f((frame.y0 + frame.y1) / 2)}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {_f((frame.y0 + frame.y1) / 2)})">{escape(y_label)}</text>')
    return out


def _bar(points, frame_labels):
    # points: (category, value) sorted by category
    values = [v for _, v in points]
    frame = _Frame((0.0, float(len(points))), _domain(values, include_zero=True))
    body = _axes(frame, *frame_labels, x_ticks=False)
    slot = (frame.x1 - frame.x0) / len(points)
    base = frame.sy(0.0)
    for i, (cat, v) in enumerate(points):
        top = frame.sy(v)
        x = frame.x0 + slot * i + slot * 0.1
        y, h = (top, base - top) if v >= 0 else (base, top - base)
        body.append(f'<rect class="bar" x="{_f(x)}" y="{_f(y)}" width="{_f(slot * 0.8)}" height="{_f(h)}" '
                    f'fill="#4c72b0"><title>{escape(cat)}: {_label(v)}</title></rect>')
        body.append(f'<text x="{_f(x + slot * 0.4)}" y="{_f(frame.y0 + 14)}" text-anchor="middle" '
                    f'font-size="10">{escape(cat)}</text>')
    return body


def _scatter(points, frame_labels, identity):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if identity:
        dom = _domain(xs + ys)
        frame = _Frame(dom, dom)
    else:
        frame = _Frame(_domain(xs), _domain(ys))
    body = _axes(frame, *frame_labels)
    if identity:
        lo, hi = frame.xdom
        body.append(f'<line class="identity" x1="{_f(frame.sx(lo))}" y1="{_f(frame.sy(lo))}" '
                    f'x2="{_f(frame.sx(hi))}" y2="{_f(frame.sy(hi))}" stroke="#c44e52" stroke-dasharray="4 3"/>')
    for x, y in points:
        body.append(f'<circle class="marker" cx="{_f(frame.sx(x))}" cy="{_f(frame.sy(y))}" r="3" fill="#4c72b0"/>')
    return body


def _line(points, frame_labels):
    frame = _Frame(_domain([p[0] for p in points]), _domain([p[1] for p in points]))
    body = _axes(frame, *frame_labels)
    coords = " ".join(f"{_f(frame.sx(x))},{_f(frame.sy(y))}" for x, y in points)
    body.append(f'<polyline class="series" points="{coords}" fill="none" stroke="#4c72b0" stroke-width="1.5"/>')
    return body


def render_chart(rows: Iterable[dict], kind: str, x: str, y: str,
                 title: str = "", identity: bool = False) -> str:
    """SVG document for ``rows`` (dicts, e.g. from csv.DictReader).

    bar: one bar per distinct ``x`` category, sorted; scatter/line: numeric
    ``x`` and ``y``, lines drawn in ascending ``x``. Rows whose values do not
    parse as numbers are skipped.
    """
    if kind not in KINDS:
        raise ChartError(f"unknown chart kind {kind!r}; expected one of {', '.join(KINDS)}")
    rows = list(rows)
    if rows and (x not in rows[0] or y not in rows[0]):
        missing = [c for c in (x, y) if c not in rows[0]]
        raise ChartError(f"column not in report: {', '.join(missing)}")
    if kind == "bar":
        points = sorted((str(r[x]), _num(r[y])) for r in rows if _num(r[y]) is not None)
    else:
        points = sorted((_num(r[x]), _num(r[y])) for r in rows
                        if _num(r[x]) is not None and _num(r[y]) is not None)
    if not points:
        raise ChartError("nothing to plot")
    labels = (x, y)
    if kind == "bar":
        body = _bar(points, labels)
    elif kind == "scatter":
        body = _scatter(points, labels, identity)
    else:
        body = _line(points, labels)
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
    ]
    if title:
        head.append(f'<text x="{WIDTH // 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"
