"""Command-line entry point: ``rentscrape <subcommand> ...``.

Stages hand off through files: crawl writes snapshots, extract writes listing
records (JSON Lines), clean writes a cleaned stage, and the report commands
read records and write CSV, GeoJSON or SVG. Diagnostics go to stderr.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from collections import defaultdict
from contextlib import contextmanager
from pathlib import Path

from . import charts, extractor, fetcher, geo, indicators, pipeline, refdata
from .records import RecordError, read_records, write_records

logger = logging.getLogger("rentscrape")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(Exception):
    """Bad or missing input data; maps to exit code 2."""


class UsageError(Exception):
    """Invalid combination of options; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# helpers


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return format(value, ".10g")
    return str(value)


def _need(path, what="input file"):
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise DataError(f"{p}: no such {what}")
    return p


@contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write_csv(path, header, rows):
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_listings(path):
    path = _need(path, "listings file")
    try:
        return [pipeline.as_listing(l) for l in read_records(path)]
    except RecordError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _crosswalk(path):
    if path is None:
        return refdata.default_crosswalk()
    return refdata.load_crosswalk(_need(path, "crosswalk file"))


def _acs(path):
    if path is None:
        return refdata.load_acs(refdata.default_acs_path())
    return refdata.load_acs(_need(path, "ACS file"))


def _joined(listings, crosswalk):
    groups, diag = refdata.join_listings(listings, crosswalk)
    logger.info("join: %d listings in, %d joined, %d unmapped", diag.total, diag.joined, diag.unmapped)
    return groups


def _read_table(path, required):
    path = _need(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{path}: missing required columns: {', '.join(missing)}")
        return path, list(reader)


def _int_or_none(value):
    return None if value is None else int(value)


def _float_cell(path, rowno, row, column, required=True):
    text = (row.get(column) or "").strip().replace(",", "").lstrip("$")
    if not text or text.lower() in ("n/a", "na"):
        if required:
            raise DataError(f"{path}: row {rowno}: missing {column}")
        return None
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{path}: row {rowno}: non-numeric {column} {text!r}") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_crawl(args):
    regions = [r.strip() for item in args.region or [] for r in item.split(",") if r.strip()]
    if not regions:
        raise UsageError("crawl needs at least one --region")
    if args.out is None:
        raise UsageError("crawl needs --out (snapshot directory)")
    try:
        config = fetcher.CrawlConfig(
            regions=regions,
            max_pages_per_region=args.max_pages,
            min_request_interval=args.interval_ms,
            user_agent=args.user_agent,
            timeout=args.timeout,
            snapshot_dir=Path(args.out),
            respect_robots=not args.ignore_robots,
            index_url_template=args.index_url,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    selectors = extractor.load_selectors(_need(args.selectors)) if args.selectors else None
    try:
        counts = fetcher.crawl(config, selectors, workers=args.workers)
    except fetcher.CrawlAborted as exc:
        raise DataError(str(exc)) from exc
    _write_csv("-", ["region", "snapshots"], sorted(counts.items()))
    return EXIT_OK


def cmd_extract(args):
    snaps_dir = _need(args.snapshots, "snapshot directory")
    selectors = extractor.load_selectors(_need(args.selectors)) if args.selectors else None
    try:
        snapshots = list(fetcher.iter_snapshots(snaps_dir))
    except (ValueError, KeyError) as exc:
        raise DataError(f"{snaps_dir}: unreadable snapshot: {exc}") from exc
    listings, rejects = extractor.extract_snapshots(snapshots, selectors)
    with _output(args.out) as fh:
        write_records(listings, fh)
    if args.rejects:
        _write_csv(args.rejects, ["url", "reason"], rejects)
    logger.info("extracted %d listings from %d snapshots (%d rejected)",
                len(listings), len(snapshots), len(rejects))
    return EXIT_OK


def _stats_table(result):
    rows = [[getattr(s, column) for column in pipeline.STATS_COLUMNS] for s in result.stats()]
    return list(pipeline.STATS_COLUMNS), rows


def cmd_clean(args):
    listings = _read_listings(args.input)
    if args.fixed_bounds:
        bounds = pipeline.TABLE2_BOUNDS
    else:
        if not 0 <= args.p_low < args.p_high <= 100:
            raise UsageError("--p-low and --p-high must satisfy 0 <= p-low < p-high <= 100")
        bounds = None
    try:
        result = pipeline.run_pipeline(listings, bounds, args.p_low, args.p_high)
    except ValueError as exc:
        raise DataError(f"{args.input}: {exc}") from exc
    b = result.bounds
    logger.info("bounds: rent %s-%s, sqft %s-%s, rent/sqft %s-%s",
                _fmt(b.rent_min), _fmt(b.rent_max), _fmt(b.sqft_min), _fmt(b.sqft_max),
                _fmt(b.rpsf_min), _fmt(b.rpsf_max))
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, stage in result.stages.items():
            write_records(stage, out_dir / f"{name}.jsonl")
    report_to_stdout = args.report == "-"
    if args.out is not None or not (report_to_stdout or args.out_dir):
        with _output(args.out) as fh:
            write_records(result.stages[args.stage], fh)
    if args.report is not None:
        header, rows = _stats_table(result)
        _write_csv(args.report, header, rows)
    return EXIT_OK


REPORT_COLUMNS = ("area_id", "median_rent", "median_sqft", "median_rpsf",
                  "rent_proportion", "rental_power", "listing_count")


def _report_row(rep: indicators.RegionReport):
    return [rep.area_id, rep.median_rent, rep.median_sqft, rep.median_rpsf,
            rep.display_rent_proportion, rep.display_rental_power, rep.listing_count]


def cmd_report(args):
    if bool(args.listings) == bool(args.summary):
        raise UsageError("report needs exactly one of --listings or --summary")
    reports = []
    if args.summary:
        path, rows = _read_table(args.summary, ("area_id", "median_income", "median_rent", "median_rpsf"))
        national = args.national_median_rent or indicators.NATIONAL_MEDIAN_RENT
        for rowno, row in enumerate(rows, 2):
            reports.append(indicators.region_indicators(
                row["area_id"].strip(),
                median_rent=_float_cell(path, rowno, row, "median_rent"),
                median_sqft=_float_cell(path, rowno, row, "median_sqft", required=False),
                median_rpsf=_float_cell(path, rowno, row, "median_rpsf"),
                listing_count=_int_or_none(_float_cell(path, rowno, row, "listing_count", required=False)),
                median_income=_float_cell(path, rowno, row, "median_income", required=False),
                national_median_rent=national,
            ))
    else:
        listings = _read_listings(args.listings)
        if not listings:
            raise DataError(f"{args.listings}: no listings")
        crosswalk = _crosswalk(args.crosswalk)
        acs = _acs(args.acs)
        national = args.national_median_rent
        if national is None:
            national = pipeline.percentile(pipeline.sorted_array(l.rent for l in listings), 50)
        for area_id, group in _joined(listings, crosswalk).items():
            rec = acs.get(area_id)
            if rec is None:
                logger.warning("%s: not in ACS table; rent proportion omitted", area_id)
            reports.append(indicators.region_summary(group, rec, national, area_id=area_id))
    _write_csv(args.out, REPORT_COLUMNS, (_report_row(r) for r in sorted(reports, key=lambda r: r.area_id)))
    return EXIT_OK


def cmd_affordability(args):
    listings = _read_listings(args.listings)
    crosswalk = _crosswalk(args.crosswalk)
    if not args.fmr:
        raise UsageError("affordability needs --fmr")
    fmr = refdata.load_fmr(_need(args.fmr, "FMR file"))
    reports = []
    for area_id, group in _joined(listings, crosswalk).items():
        entry = crosswalk.area(area_id)
        if entry is not None and entry.fmr_excluded:
            logger.info("%s: excluded from FMR comparison", area_id)
            continue
        reports.append(indicators.fmr_proportions(group, fmr, area_id))
    reports.append(indicators.fmr_total(reports))
    header = ["area_id"] + [f"prop_{b}br" for b in indicators.FMR_BEDROOMS] + ["prop_all"]
    rows = ([r.area_id] + [r.proportion(b) for b in indicators.FMR_BEDROOMS] + [r.pooled] for r in reports)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _ratio_rows(reports, means):
    rows = [[r.area_id] + [r.ratios.get(b) for b in indicators.FMR_BEDROOMS] for r in reports]
    rows.append(["MEAN"] + [means[b] for b in indicators.FMR_BEDROOMS])
    return rows


def cmd_ratios(args):
    modes = [m for m in (args.listings, args.medians, args.ratios) if m]
    if len(modes) != 1:
        raise UsageError("ratios needs exactly one of --listings, --medians or --ratios")
    corpus = None
    if args.ratios:
        cols = [f"ratio_{b}br" for b in indicators.FMR_BEDROOMS]
        path, rows = _read_table(args.ratios, ["area_id"] + cols)
        reports = []
        for rowno, row in enumerate(rows, 2):
            ratios = {}
            for b, col in zip(indicators.FMR_BEDROOMS, cols):
                v = _float_cell(path, rowno, row, col, required=False)
                if v is not None:
                    ratios[b] = v
            reports.append(indicators.RatioReport(row["area_id"].strip(), ratios))
        reports.sort(key=lambda r: r.area_id)
        means = indicators.ratio_means(reports)
        hud = None
    else:
        if not args.hud:
            raise UsageError("ratios needs --hud with --listings or --medians")
        hud = refdata.load_hud_medians(_need(args.hud, "HUD median file"))
        if args.medians:
            path, rows = _read_table(args.medians, ("area_id", "bedrooms", "median_rent"))
            corpus = {}
            for rowno, row in enumerate(rows, 2):
                beds = int(_float_cell(path, rowno, row, "bedrooms"))
                corpus[(row["area_id"].strip(), beds)] = _float_cell(path, rowno, row, "median_rent")
        else:
            listings = _read_listings(args.listings)
            corpus = indicators.bedroom_medians(_joined(listings, _crosswalk(args.crosswalk)))
        reports, means = indicators.hud_ratios(corpus, hud)
    header = ["area_id"] + [f"ratio_{b}br" for b in indicators.FMR_BEDROOMS]
    _write_csv(args.out, header, _ratio_rows(reports, means))
    if args.correlations:
        if corpus is None:
            raise UsageError("--correlations needs --listings or --medians input")
        rows = []
        for beds in indicators.FMR_BEDROOMS:
            pairs = [(corpus[k], hud[k].median_rent) for k in sorted(corpus)
                     if k[1] == beds and k in hud]
            try:
                res = indicators.correlate(pairs, beds)
                rows.append([beds, res.r, res.p_value, res.n])
            except indicators.IndicatorError as exc:
                logger.warning("%d bedrooms: %s", beds, exc)
                rows.append([beds, None, None, len(pairs)])
        _write_csv(args.correlations, ["bedrooms", "r", "p_value", "n"], rows)
    return EXIT_OK


def cmd_weekday(args):
    profile = indicators.weekday_profile(_read_listings(args.listings))
    _write_csv(args.out, ["day", "median_rpsf", "listing_count", "mean_count"],
               ([e.day, e.median_rpsf, e.listing_count, e.mean_count] for e in profile.entries))
    return EXIT_OK


def cmd_density(args):
    listings = _read_listings(args.listings)
    if args.by == "area":
        groups = _joined(listings, _crosswalk(args.crosswalk))
    elif args.by == "region":
        groups = defaultdict(list)
        for l in listings:
            groups[l.region].append(l)
    else:
        groups = {"ALL": listings}
    rows = []
    for name in sorted(groups):
        values = [l.rent_per_sqft for l in groups[name] if l.rent_per_sqft is not None]
        try:
            curve = indicators.density_profile(values, points=args.points, pad=args.pad)
        except indicators.IndicatorError as exc:
            logger.warning("%s: %s; skipped", name, exc)
            continue
        logger.info("%s: bandwidth %s", name, _fmt(curve.bandwidth))
        rows.extend([name, float(x), float(d)] for x, d in zip(curve.grid, curve.density))
    _write_csv(args.out, ["group", "x", "density"], rows)
    return EXIT_OK


def cmd_map(args):
    if bool(args.tracts) == bool(args.points):
        raise UsageError("map needs exactly one of --tracts or --points")
    listings = [l for l in _read_listings(args.listings) if l.has_coords]
    values = [l.rent_per_sqft for l in listings if l.rent_per_sqft is not None]
    breaks = indicators.quintile_breaks(values) if values else None
    if args.points:
        doc = geo.points_geojson(listings, breaks)
    else:
        diagnostics = []
        try:
            polygons = geo.load_tracts(_need(args.tracts, "tract file"), diagnostics)
        except geo.GeoJSONError as exc:
            raise DataError(str(exc)) from exc
        index = geo.build_tract_index(polygons, diagnostics)
        if breaks is None:
            aggregates, coverage = [], geo.TractCoverage(0, 0, 0)
        else:
            aggregates, coverage = geo.tract_medians(listings, index, breaks, args.min_count)
        logger.info("tracts: %d geolocated, %d located, %d unlocated, %d below --min-count",
                    coverage.total, coverage.located, coverage.unlocated, coverage.suppressed_listings)
        doc = geo.tracts_geojson(aggregates, polygons)
    with _output(args.out) as fh:
        fh.write(geo.dumps_geojson(doc))
    return EXIT_OK


def cmd_chart(args):
    path, rows = _read_table(args.input, ())
    try:
        svg = charts.render_chart(rows, args.kind, args.x, args.y, title=args.title or "",
                                  identity=args.identity)
    except charts.ChartError as exc:
        raise DataError(f"{path}: {exc}") from exc
    with _output(args.out) as fh:
        fh.write(svg)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, metavar="INI",
                        help="INI file of option defaults; [common] and [<subcommand>] sections")
    # SUPPRESS so a subcommand's defaults do not mask flags given before it
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log progress to stderr")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="log errors only")

    parser = _Parser(prog="rentscrape", parents=[common],
                     description="Collect, clean and analyze rental listings.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("crawl", cmd_crawl, "crawl listing index and detail pages into a snapshot directory")
    p.add_argument("--region", action="append", help="region id; repeat or comma-separate")
    p.add_argument("--max-pages", type=int, default=25, help="cap on index pages and on listing pages per region")
    p.add_argument("--interval-ms", type=float, default=2000.0, help="minimum milliseconds between requests to a host")
    p.add_argument("--out", help="snapshot directory")
    p.add_argument("--user-agent", default=fetcher.CrawlConfig.user_agent)
    p.add_argument("--timeout", type=float, default=30.0, help="seconds per request")
    p.add_argument("--index-url", default=fetcher.DEFAULT_INDEX_TEMPLATE,
                   help="index URL template containing {region}")
    p.add_argument("--selectors", help="selector INI file")
    p.add_argument("--ignore-robots", action="store_true")
    p.add_argument("--workers", type=int, default=4)

    p = add("extract", cmd_extract, "parse stored snapshots into listing records (JSON Lines)")
    p.add_argument("--snapshots", required=False, help="snapshot directory")
    p.add_argument("--selectors", help="selector INI file")
    p.add_argument("--out", help="records file (default stdout)")
    p.add_argument("--rejects", help="CSV of rejected pages and reasons")

    p = add("clean", cmd_clean, "run dedup, completeness, percentile filter and geolocation stages")
    p.add_argument("--in", dest="input", help="listing records")
    p.add_argument("--stage", choices=pipeline.STAGES, default="filtered", help="stage written to --out")
    p.add_argument("--out", help="records file for --stage (default stdout)")
    p.add_argument("--out-dir", help="write every stage as <stage>.jsonl here")
    p.add_argument("--report", nargs="?", const="-", help="descriptive statistics CSV (default stdout)")
    p.add_argument("--fixed-bounds", action="store_true", help="use the fixed 2014 nationwide filter bounds")
    p.add_argument("--p-low", type=float, default=pipeline.DEFAULT_P_LOW)
    p.add_argument("--p-high", type=float, default=pipeline.DEFAULT_P_HIGH)

    p = add("report", cmd_report, "per-area median rents, rent proportion and rental power")
    p.add_argument("--listings", help="cleaned listing records")
    p.add_argument("--summary", help="CSV with area_id,median_income,median_rent,median_rpsf")
    p.add_argument("--crosswalk")
    p.add_argument("--acs")
    p.add_argument("--national-median-rent", type=float,
                   help="default: median of --listings, or 1145 with --summary")
    p.add_argument("--out")

    p = add("affordability", cmd_affordability, "share of listings at or below the Fair Market Rent")
    p.add_argument("--listings")
    p.add_argument("--crosswalk")
    p.add_argument("--fmr")
    p.add_argument("--out")

    p = add("ratios", cmd_ratios, "corpus median rent over HUD median rent, per bedroom count")
    p.add_argument("--listings")
    p.add_argument("--medians", help="CSV with area_id,bedrooms,median_rent")
    p.add_argument("--ratios", help="CSV with area_id,ratio_1br..ratio_4br; recompute means only")
    p.add_argument("--crosswalk")
    p.add_argument("--hud")
    p.add_argument("--correlations", help="write Pearson r per bedroom count to this CSV")
    p.add_argument("--out")

    p = add("weekday", cmd_weekday, "median rent/sqft and mean daily listing count by weekday")
    p.add_argument("--listings")
    p.add_argument("--out")

    p = add("density", cmd_density, "kernel density of rent/sqft")
    p.add_argument("--listings")
    p.add_argument("--by", choices=("region", "area", "all"), default="region")
    p.add_argument("--crosswalk")
    p.add_argument("--points", type=int, default=indicators.DEFAULT_GRID_POINTS)
    p.add_argument("--pad", type=float, default=0.0, help="extend the grid by this many bandwidths")
    p.add_argument("--out")

    p = add("map", cmd_map, "GeoJSON of tract medians or listing points")
    p.add_argument("--listings")
    p.add_argument("--tracts", help="tract polygons (GeoJSON)")
    p.add_argument("--points", action="store_true", help="emit listing points instead of tracts")
    p.add_argument("--min-count", type=int, default=1, help="omit tracts with fewer listings")
    p.add_argument("--out")

    p = add("chart", cmd_chart, "SVG chart from a report CSV")
    p.add_argument("--in", dest="input", help="report CSV")
    p.add_argument("--kind", choices=charts.KINDS, default="bar")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--title")
    p.add_argument("--identity", action="store_true", help="draw y = x on scatter charts")
    p.add_argument("--out")
    return parser


REQUIRED = {
    "extract": ("snapshots",),
    "clean": ("input",),
    "affordability": ("listings",),
    "weekday": ("listings",),
    "density": ("listings",),
    "map": ("listings",),
    "chart": ("input", "x", "y"),
}


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def _apply_config(parser, path, command):
    cp = configparser.ConfigParser(interpolation=None)
    try:
        if not cp.read(path, encoding="utf-8"):
            raise DataError(f"{path}: no such config file")
    except configparser.Error as exc:
        raise DataError(f"{path}: {exc}") from exc
    subparser = _subparsers(parser).get(command)
    if subparser is None:
        return
    values = {}
    for section in ("common", command):
        if cp.has_section(section):
            values.update(cp.items(section))
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        if dest == "in":
            dest = "input"
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"{path}: unknown option {key!r} for {command}")
        try:
            if isinstance(action, argparse._StoreTrueAction):
                value = cp._convert_to_boolean(raw)
            elif isinstance(action, argparse._AppendAction):
                value = [raw]
            elif action.type is not None:
                value = action.type(raw)
            else:
                value = raw
        except ValueError as exc:
            raise UsageError(f"{path}: bad value for {key!r}: {raw!r}") from exc
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}: {key} must be one of {', '.join(map(str, action.choices))}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)


_handler = None


def _setup_logging(args):
    global _handler
    root = logging.getLogger("rentscrape")
    if _handler is not None:
        root.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(_handler)
    root.propagate = False
    if getattr(args, "quiet", False):
        root.setLevel(logging.ERROR)
    else:
        root.setLevel(logging.INFO if getattr(args, "verbose", False) else logging.WARNING)


def run_command(argv) -> int:
    argv = list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if not a.startswith("-")), None)
    try:
        if known.config:
            _apply_config(parser, known.config, command)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"rentscrape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"rentscrape: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _setup_logging(args)
    try:
        for dest in REQUIRED.get(args.command, ()):
            if getattr(args, dest, None) in (None, ""):
                flag = "--in" if dest == "input" else "--" + dest.replace("_", "-")
                raise UsageError(f"{args.command} needs {flag}")
        return args.func(args)
    except UsageError as exc:
        _subparsers(parser)[args.command].print_usage(sys.stderr)
        print(f"rentscrape {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, refdata.RefDataError, extractor.SelectorError, geo.GeoJSONError,
            indicators.IndicatorError, RecordError) as exc:
        print(f"rentscrape {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        name = exc.filename or ""
        print(f"rentscrape {args.command}: error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
