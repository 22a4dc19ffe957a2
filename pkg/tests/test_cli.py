import csv
import io
import json

import pytest

from rentscrape import cli, pipeline
from rentscrape.fixture_site import serve_site, write_reference_bundle
from rentscrape.records import read_records


def run(*argv):
    return cli.run_command([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def workspace(site, tmp_path_factory):
    """Crawl, extract and clean the fixture site once for the whole module."""
    root = tmp_path_factory.mktemp("cli")
    bundle = write_reference_bundle(site, root / "ref")
    with serve_site(site) as url:
        regions = ",".join(p.region for p in site.regions)
        code = run("crawl", "--region", regions, "--out", root / "snaps", "--interval-ms", 1,
                   "--max-pages", 100, "--index-url", site.index_template(url))
    assert code == 0
    assert run("extract", "--snapshots", root / "snaps", "--out", root / "raw.jsonl",
               "--rejects", root / "rejects.csv") == 0
    assert run("clean", "--in", root / "raw.jsonl", "--out-dir", root / "stages",
               "--out", root / "filtered.jsonl") == 0
    return root, bundle


def test_help_exits_zero(capsys):
    assert run("--help") == 0
    assert "crawl" in capsys.readouterr().out
    assert run("clean", "--help") == 0


@pytest.mark.parametrize("argv,code", [
    ((), 1),
    (("bogus",), 1),
    (("clean",), 1),
    (("clean", "--in", "/nonexistent/x.jsonl"), 2),
    (("clean", "--in", "x", "--p-low", "abc"), 1),
    (("report",), 1),
    (("map", "--listings", "x"), 1),
    (("chart", "--in", "/nonexistent.csv", "--x", "a", "--y", "b"), 2),
    (("crawl", "--out", "d"), 1),
])
def test_exit_codes(argv, code, capsys):
    assert run(*argv) == code
    assert capsys.readouterr().err


def test_bad_record_file_is_data_error(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"listing_id": "1"}\n')
    assert run("clean", "--in", bad) == 2


def test_extract_outputs(workspace, site):
    root, _ = workspace
    raw = read_records(root / "raw.jsonl")
    keys = [(l.region, l.listing_id) for l in raw]
    assert keys == sorted(keys)
    reasons = {r["reason"] for r in read_csv(root / "rejects.csv")}
    assert "HTTP 404" in reasons and "no posting date" in reasons


def test_clean_stage_files_and_report(workspace, capsys):
    root, _ = workspace
    counts = [len(read_records(root / "stages" / f"{s}.jsonl")) for s in pipeline.STAGES]
    assert counts == sorted(counts, reverse=True)
    assert (root / "filtered.jsonl").read_bytes() == (root / "stages" / "filtered.jsonl").read_bytes()
    assert run("clean", "--in", root / "raw.jsonl", "--report") == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["stage"] for r in rows] == list(pipeline.STAGES)
    assert list(rows[0]) == list(pipeline.STATS_COLUMNS)
    assert [int(r["listing_count"]) for r in rows] == counts


def test_clean_fixed_bounds_and_stage(workspace, tmp_path):
    root, _ = workspace
    out = tmp_path / "geo.jsonl"
    assert run("clean", "--in", root / "raw.jsonl", "--fixed-bounds", "--stage", "geolocated", "--out", out) == 0
    got = read_records(out)
    assert got and all(l.has_coords for l in got)
    assert all(pipeline.TABLE2_BOUNDS.admits(pipeline.as_listing(l)) for l in got)


def test_config_defaults_and_flag_override(workspace, tmp_path):
    root, _ = workspace
    ini = tmp_path / "c.ini"
    ini.write_text("[clean]\np-low = 10\np-high = 90\nstage = thorough\n")
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run("clean", "--config", ini, "--in", root / "raw.jsonl", "--report", a, "--out", tmp_path / "x") == 0
    assert run("clean", "--config", ini, "--in", root / "raw.jsonl", "--p-low", 0.2, "--p-high", 99.8,
               "--report", b, "--out", tmp_path / "y") == 0
    assert run("clean", "--in", root / "raw.jsonl", "--report", c, "--out", tmp_path / "z") == 0
    assert a.read_bytes() != c.read_bytes()
    assert b.read_bytes() == c.read_bytes()
    # config picked the thorough stage for --out
    assert len(read_records(tmp_path / "x")) == len(read_records(root / "stages" / "thorough.jsonl"))


def test_config_unknown_key(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[clean]\ncolour = red\n")
    assert run("clean", "--config", ini, "--in", "x") == 1
    assert run("clean", "--config", tmp_path / "missing.ini", "--in", "x") == 2


def test_report_from_listings(workspace, tmp_path):
    root, bundle = workspace
    out = tmp_path / "r.csv"
    assert run("report", "--listings", root / "filtered.jsonl", "--crosswalk", bundle["crosswalk.txt"],
               "--acs", bundle["acs.csv"], "--out", out) == 0
    rows = read_csv(out)
    assert list(rows[0]) == list(cli.REPORT_COLUMNS)
    assert {r["area_id"] for r in rows} == {"northfield_msa", "southport_msa", "lakes_csa"}
    for r in rows:
        assert 0 < float(r["rent_proportion"]) < 1
        assert int(r["rental_power"]) > 0


def test_report_summary_mode(fixtures_dir, tmp_path):
    out = tmp_path / "a.csv"
    assert run("report", "--summary", fixtures_dir / "area_summary.csv", "--out", out) == 0
    rows = {r["area_id"]: r for r in read_csv(out)}
    assert len(rows) == 58
    assert rows["memphis_msa"]["rental_power"] == "1659"


def test_affordability_skips_excluded(workspace, tmp_path):
    root, bundle = workspace
    out = tmp_path / "f.csv"
    assert run("affordability", "--listings", root / "filtered.jsonl", "--crosswalk", bundle["crosswalk.txt"],
               "--fmr", bundle["fmr.csv"], "--out", out) == 0
    rows = read_csv(out)
    ids = [r["area_id"] for r in rows]
    assert "southport_msa" not in ids and ids[-1] == "ALL"
    for r in rows:
        for key in ("prop_1br", "prop_2br", "prop_3br", "prop_4br", "prop_all"):
            assert r[key] == "" or 0 <= float(r[key]) <= 1


def test_ratios_modes(workspace, fixtures_dir, tmp_path):
    root, bundle = workspace
    out, corr = tmp_path / "r.csv", tmp_path / "c.csv"
    assert run("ratios", "--ratios", fixtures_dir / "hud_ratios.csv", "--out", out) == 0
    assert read_csv(out)[-1]["area_id"] == "MEAN"
    assert run("ratios", "--listings", root / "filtered.jsonl", "--crosswalk", bundle["crosswalk.txt"],
               "--hud", bundle["hud_median.csv"], "--out", out, "--correlations", corr) == 0
    assert [r["bedrooms"] for r in read_csv(corr)] == ["1", "2", "3", "4"]
    assert run("ratios", "--ratios", fixtures_dir / "hud_ratios.csv", "--correlations", corr) == 1


def test_weekday_density_map_chart(workspace, tmp_path):
    root, bundle = workspace
    listings = root / "filtered.jsonl"
    wk = tmp_path / "w.csv"
    assert run("weekday", "--listings", listings, "--out", wk) == 0
    assert [r["day"] for r in read_csv(wk)][0] == "Monday"
    dens = tmp_path / "d.csv"
    assert run("density", "--listings", listings, "--by", "all", "--points", 64, "--out", dens) == 0
    assert len(read_csv(dens)) == 64
    tracts = tmp_path / "t.geojson"
    assert run("map", "--listings", listings, "--tracts", bundle["tracts.geojson"], "--min-count", 2,
               "--out", tracts) == 0
    doc = json.loads(tracts.read_text())
    assert doc["type"] == "FeatureCollection"
    assert all(f["properties"]["listing_count"] >= 2 for f in doc["features"])
    pts = tmp_path / "p.geojson"
    assert run("map", "--listings", listings, "--points", "--out", pts) == 0
    assert json.loads(pts.read_text())["features"]
    svg = tmp_path / "w.svg"
    assert run("chart", "--in", wk, "--x", "day", "--y", "listing_count", "--out", svg) == 0
    assert svg.read_text().startswith("<?xml")
    assert run("chart", "--in", wk, "--x", "day", "--y", "nope") == 2


def test_reruns_are_byte_identical(workspace, tmp_path):
    root, bundle = workspace
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert run("extract", "--snapshots", root / "snaps", "--out", d / "raw.jsonl") == 0
        assert run("clean", "--in", d / "raw.jsonl", "--out", d / "f.jsonl", "--report", d / "s.csv") == 0
        assert run("report", "--listings", d / "f.jsonl", "--crosswalk", bundle["crosswalk.txt"],
                   "--acs", bundle["acs.csv"], "--out", d / "r.csv") == 0
        outs.append([(d / n).read_bytes() for n in ("raw.jsonl", "f.jsonl", "s.csv", "r.csv")])
    assert outs[0] == outs[1]
