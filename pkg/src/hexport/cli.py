"""Command-line front end.

Subcommands: ``synth`` (generate a Runge-field raster), ``port`` (square to
hexagonal raster), ``degrade`` (punch seeded NODATA holes), ``errors``
(porting and extension error report), ``flow`` (water routing), ``render``
(SVG/PPM heatmaps).  Every subcommand is a pure function of its inputs and
flags, so re-running reproduces outputs byte for byte.  Exit codes: 0 on
success, 1 on data errors, 2 on flag errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import grid_io, hydroflow, metrics
from .errors import HexportError
from .porting import PortingConfig, port


def _parse_bounds(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError("bounds must be xmin,ymin,xmax,ymax")
    return tuple(float(p) for p in parts)


def _read_rect(path: str) -> grid_io.RectRaster:
    with open(path, "r", encoding="utf-8") as fh:
        return grid_io.parse_esri_ascii(fh.read())


def _read_hex(path: str) -> grid_io.HexRaster:
    with open(path, "r", encoding="utf-8") as fh:
        return grid_io.read_hex_raster(fh.read())


def _read_any(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    head = text.lstrip().lower()
    if head.startswith("ncols") and "xcenter0" in head[:200]:
        return grid_io.read_hex_raster(text)
    return grid_io.parse_esri_ascii(text)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cmd_synth(args) -> int:
    raster = metrics.runge_raster(
        _parse_bounds(args.bounds), args.cols, args.rows, args.runge
    )
    _write_text(args.out, grid_io.write_esri_ascii(raster))
    print(f"wrote {args.out}: {raster.ncols}x{raster.nrows} cells, runge a={args.runge}")
    return 0


def _cmd_port(args) -> int:
    raster = _read_rect(getattr(args, "in"))
    config = PortingConfig(
        method=args.method, cells_across=args.cells_across, radius=args.radius
    )
    threads = args.threads or os.cpu_count() or 1
    result = port(raster, config, threads=threads)
    _write_text(args.out, grid_io.write_hex_raster(result))
    print(
        f"wrote {args.out}: {result.ncols}x{result.nrows} hex cells, "
        f"r={result.r!r}, method={args.method}"
    )
    return 0


def _cmd_degrade(args) -> int:
    raster = _read_rect(getattr(args, "in"))
    degraded = metrics.degrade_raster(raster, args.m, args.n, seed=args.seed)
    _write_text(args.out, grid_io.write_esri_ascii(degraded))
    kept = int((degraded.values != degraded.nodata).sum())
    print(f"wrote {args.out}: seed = {args.seed}, m = {args.m}, n = {args.n}")
    print(f"retained {kept} of {raster.values.size} cells")
    return 0


def _cmd_errors(args) -> int:
    raster = _read_rect(args.raster)
    field = metrics.RungeField(args.runge) if args.runge is not None else None
    report = {
        "raster": args.raster,
        "method": args.method,
        "quad": args.quad,
    }
    if args.runge is not None:
        report["runge_a"] = args.runge
    report.update(
        metrics.extension_l1_errors(raster, method=args.method, field=field, quad=args.quad)
    )
    if args.hex is not None:
        hexraster = _read_hex(args.hex)
        report["hex"] = args.hex
        report.update(metrics.l1_errors(raster, hexraster, field=field, quad=args.quad))
    metrics.write_report(args.report, report)
    for key, value in report.items():
        print(f"{key} = {value}")
    return 0


def _cmd_flow(args) -> int:
    hexraster = _read_hex(args.hex)
    grid = hexraster.to_grid()
    dt = args.dt
    if dt is None:
        dt = hydroflow.suggest_dt(
            grid, hexraster.values, args.h0, args.manning, nodata=hexraster.nodata
        )
    state = hydroflow.FlowState(
        grid=grid,
        z=hexraster.values,
        h=np.full((grid.nrows, grid.ncols), args.h0),
        manning_n=args.manning,
        dt=dt,
        boundary=args.boundary,
        nodata=hexraster.nodata,
    )
    result = hydroflow.run(state, args.steps, mask_margin=args.mask_margin)
    if args.out_depth:
        _write_text(args.out_depth, grid_io.write_hex_raster(result.depth))
    if args.out_mask:
        _write_text(args.out_mask, grid_io.write_hex_raster(result.mask))
    print(f"dt = {dt!r}")
    for key, value in result.summary.items():
        print(f"{key} = {value}")
    return 0


def _cmd_render(args) -> int:
    raster = _read_any(getattr(args, "in"))
    fmt = "svg" if args.out.lower().endswith(".svg") else "ppm"
    value_range = None
    if args.vmin is not None or args.vmax is not None:
        if args.vmin is None or args.vmax is None:
            raise ValueError("give both --min and --max or neither")
        value_range = (args.vmin, args.vmax)
    data = grid_io.render(
        raster,
        fmt,
        palette=args.palette,
        value_range=value_range,
        px_per_cell=args.px_per_cell,
    )
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"wrote {args.out} ({fmt}, {len(data)} bytes)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexport",
        description="Port square rasters to hexagonal rasters, measure the "
        "porting error, and route water on the result.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic Runge-field raster")
    p.add_argument("--runge", type=float, required=True, help="Runge parameter a")
    p.add_argument("--cols", type=int, required=True, help="number of columns")
    p.add_argument("--rows", type=int, required=True, help="number of rows")
    p.add_argument("--bounds", required=True, help="xmin,ymin,xmax,ymax")
    p.add_argument("--out", required=True, help="output ESRI ASCII path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("port", help="port a square raster to a hexagonal raster")
    p.add_argument("--in", required=True, help="input ESRI ASCII raster")
    p.add_argument("--out", required=True, help="output hex raster path")
    p.add_argument(
        "--method", default="eno", choices=["eno", "of", "crs", "id"],
        help="extension method (default eno)",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--cells-across", type=int, help="hex cells per row")
    group.add_argument("--radius", type=float, help="hex circumradius")
    p.add_argument(
        "--threads", type=int, default=0,
        help="worker threads over hex rows (0 = available parallelism)",
    )
    p.set_defaults(func=_cmd_port)

    p = sub.add_parser("degrade", help="punch seeded NODATA holes into a raster")
    p.add_argument("--in", required=True, help="input ESRI ASCII raster")
    p.add_argument("--out", required=True, help="output ESRI ASCII path")
    p.add_argument("--m", type=int, default=3, help="max row gap in cells (default 3)")
    p.add_argument("--n", type=int, default=3, help="max in-row gap in cells (default 3)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("errors", help="error report for a raster and optional hex port")
    p.add_argument("--raster", required=True, help="ESRI ASCII raster")
    p.add_argument("--hex", help="hex raster ported from it")
    p.add_argument("--method", default="eno", choices=["eno", "of", "crs", "id"])
    p.add_argument("--runge", type=float, help="compare against the Runge field with this a")
    p.add_argument("--quad", type=int, default=8, help="quadrature subsamples per cell side")
    p.add_argument("--report", required=True, help="output report path (text + .json)")
    p.set_defaults(func=_cmd_errors)

    p = sub.add_parser("flow", help="route water on a hexagonal terrain raster")
    p.add_argument("--hex", required=True, help="hex terrain raster")
    p.add_argument("--h0", type=float, default=0.1, help="uniform initial depth (default 0.1)")
    p.add_argument("--dt", type=float, help="time step (default: from a Courant-like bound)")
    p.add_argument("--manning", type=float, default=0.03, help="Manning coefficient")
    p.add_argument("--steps", type=int, required=True, help="number of steps")
    p.add_argument("--boundary", default="closed", choices=["open", "closed"])
    p.add_argument("--mask-margin", type=float, default=0.0,
                   help="relative excess over the initial depth that marks a mask cell")
    p.add_argument("--out-depth", help="output hex raster of final depths")
    p.add_argument("--out-mask", help="output hex raster of the accumulation mask")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("render", help="render a raster to SVG or PPM")
    p.add_argument("--in", required=True, help="input raster (.asc or .hex)")
    p.add_argument("--out", required=True, help="output image (.svg or .ppm)")
    p.add_argument("--palette", default="viridis", choices=sorted(grid_io.PALETTES))
    p.add_argument("--min", dest="vmin", type=float, help="explicit range minimum")
    p.add_argument("--max", dest="vmax", type=float, help="explicit range maximum")
    p.add_argument("--px-per-cell", type=int, default=8)
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (HexportError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
