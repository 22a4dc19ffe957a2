import csv
import math
import xml.etree.ElementTree as ET

import pytest

from rentscrape.charts import ChartError, render_chart

SVG = "{http://www.w3.org/2000/svg}"


def parse(svg):
    return ET.fromstring(svg.encode())


def test_two_bars_height_ratio():
    svg = render_chart([{"k": "b", "v": "2"}, {"k": "a", "v": "1"}], "bar", "k", "v")
    bars = parse(svg).findall(f"{SVG}rect[@class='bar']")
    heights = [float(b.get("height")) for b in bars]
    assert [b.find(f"{SVG}title").text.split(":")[0] for b in bars] == ["a", "b"]
    assert heights[1] == 2 * heights[0]


def test_deterministic_bytes():
    rows = [{"x": str(i), "y": str(i * i / 7)} for i in range(20)]
    for kind in ("bar", "scatter", "line"):
        assert render_chart(rows, kind, "x", "y", title="t") == render_chart(list(rows), kind, "x", "y", title="t")


def test_single_point_scatter():
    root = parse(render_chart([{"x": "1.5", "y": "2"}], "scatter", "x", "y"))
    assert len(root.findall(f"{SVG}circle[@class='marker']")) == 1
    assert root.get("width") == "640"


def test_identity_scatter_from_ratio_fixture(fixtures_dir):
    with open(fixtures_dir / "hud_ratios.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    root = parse(render_chart(rows, "scatter", "ratio_1br", "ratio_2br", identity=True))
    markers = root.findall(f"{SVG}circle[@class='marker']")
    assert len(markers) == len(rows)
    line = root.find(f"{SVG}line[@class='identity']")
    # the identity line runs corner to corner of the shared square domain
    x1, y1, x2, y2 = (float(line.get(a)) for a in ("x1", "y1", "x2", "y2"))
    assert x1 < x2 and y1 > y2


def test_line_points_in_x_order():
    rows = [{"x": "3", "y": "1"}, {"x": "1", "y": "2"}, {"x": "2", "y": "0"}]
    poly = parse(render_chart(rows, "line", "x", "y")).find(f"{SVG}polyline")
    xs = [float(p.split(",")[0]) for p in poly.get("points").split()]
    assert xs == sorted(xs) and len(xs) == 3


def test_nothing_to_plot():
    with pytest.raises(ChartError, match="nothing to plot"):
        render_chart([], "bar", "a", "b")
    with pytest.raises(ChartError, match="nothing to plot"):
        render_chart([{"a": "x", "b": "n/a"}], "bar", "a", "b")


def test_bad_column_and_kind():
    with pytest.raises(ChartError, match="column"):
        render_chart([{"a": "1"}], "bar", "a", "zz")
    with pytest.raises(ChartError, match="unknown chart kind"):
        render_chart([{"a": "1", "b": "2"}], "pie", "a", "b")


def test_negative_bars_hang_below_zero():
    root = parse(render_chart([{"k": "a", "v": "-1"}, {"k": "b", "v": "1"}], "bar", "k", "v"))
    a, b = root.findall(f"{SVG}rect[@class='bar']")
    assert math.isclose(float(a.get("y")), float(b.get("y")) + float(b.get("height")), abs_tol=0.011)


def test_text_is_escaped():
    svg = render_chart([{"k": "<a&b>", "v": "1"}], "bar", "k", "v", title="x < y")
    parse(svg)
    assert "&lt;a&amp;b&gt;" in svg
