"""Command line entry point: figure data, the tiling, fits and the final map.

Angles on the command line are in degrees.  Exit codes: 0 success, 2 domain
error (e.g. a chart point with Q < 0), 1 internal failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import PentamapError

EXIT_OK, EXIT_INTERNAL, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64
STAMP = f"pentamap {__version__}"


class Format(str, Enum):
    JSON = "json"
    CSV = "csv"
    SVG = "svg"


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid_spacing_deg: float = 5.0
    output_path: Optional[Path] = None
    format: Format = Format.JSON
    ode_rel_tol: float = 1e-10
    fit_degree: int = 20

    def __post_init__(self):
        if not self.grid_spacing_deg > 0:
            raise ValueError("grid spacing must be positive")
        if not 1 <= self.fit_degree <= 60:
            raise ValueError("fit degree must be in 1..60")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- output

def _emit(text: str, out: Optional[Path], fmt: Format) -> None:
    if fmt is Format.CSV:
        text = f"# {STAMP}\n" + text
    elif fmt is Format.SVG:
        text = text.replace(">", f"><!-- {STAMP} -->", 1)
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps({"generator": STAMP, **obj}, indent=1, sort_keys=False)


def _read_csv(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return np.loadtxt(lines[1:], delimiter=",", ndmin=2)


# ---------------------------------------------------------------- commands

def cmd_pentagon(args, cfg: RunConfig) -> None:
    from .pentagon import (AngleCoords, classify, closure_residual, pentagon_from_coords,
                           trivariate_residuals, vertex_angles)

    c = AngleCoords.degrees(args.xi, args.eta, args.sheet)
    p = pentagon_from_coords(c)
    cls = classify(p)
    try:
        tri = list(trivariate_residuals(p))
    except PentamapError:
        tri = None
    _emit(_json({
        "schema": "pentamap/1",
        "xi_deg": args.xi, "eta_deg": args.eta, "sheet": c.sheet,
        "phases_deg": [round(float(v), 12) for v in np.degrees(p.array)],
        "vertex_angles_deg": [round(float(v), 12) for v in np.degrees(vertex_angles(p))],
        "class": {"kind": cls.kind.value, "shape": cls.shape, "handedness": cls.handedness},
        "closure_residual": closure_residual(p),
        "trivariate_residuals": tri,
    }), cfg.output_path, Format.JSON)


def cmd_curvature_grid(args, cfg: RunConfig) -> None:
    from .metric import curvature_grid_csv

    text = curvature_grid_csv(cfg.grid_spacing_deg, -180 + cfg.grid_spacing_deg, 180 - cfg.grid_spacing_deg)
    _emit(text, cfg.output_path, Format.CSV)
    if args.plot:
        from .figures import plot_curvature

        d = _read_csv(text)
        plot_curvature(d[:, 0], d[:, 1], d[:, 2], args.plot)


def cmd_metric_grid(args, cfg: RunConfig) -> None:
    from .metric import metric_ellipses, metric_grid_csv

    _emit(metric_grid_csv(cfg.grid_spacing_deg), cfg.output_path, Format.CSV)
    if args.plot:
        from .figures import plot_metric_ellipses

        plot_metric_ellipses(metric_ellipses(cfg.grid_spacing_deg), args.plot)


def cmd_boundaries(args, cfg: RunConfig) -> None:
    from .loops import loops_to_json, tract_boundaries

    loops = tract_boundaries(step=args.step)
    _emit(loops_to_json(loops), cfg.output_path, Format.JSON)
    if args.plot:
        from .figures import plot_boundaries

        plot_boundaries(loops, args.plot)


def cmd_chart(args, cfg: RunConfig) -> None:
    from .beltrami import ChartConfig, chart_grid_csv, chart_tract

    conf = ChartConfig(ode_rel_tol=cfg.ode_rel_tol)
    if args.tract:
        t = chart_tract(conf)
        lines = ["side,xi_deg,eta_deg,u,v"]
        lines += [f"{n},{a:.6f},{b:.6f},{u:.12g},{v:.12g}" for n, a, b, u, v in t.to_rows()]
        text = "\n".join(lines) + "\n"
    else:
        text = chart_grid_csv(cfg.grid_spacing_deg, conf)
    _emit(text, cfg.output_path, Format.CSV)
    if args.plot:
        from .figures import plot_chart

        grid = _read_csv(chart_grid_csv(max(cfg.grid_spacing_deg, 5.0), conf))
        plot_chart(grid, chart_tract(conf), args.plot)


def cmd_tile(args, cfg: RunConfig) -> None:
    from .hyperbolic import tile_fundamental_icosagon, tiling_to_json

    tiling = tile_fundamental_icosagon()
    if cfg.format is Format.JSON:
        _emit(tiling_to_json(tiling), cfg.output_path, Format.JSON)
    else:
        _emit(tiling.to_svg(1000), cfg.output_path, Format.SVG)
    if args.plot:
        from .figures import plot_tiling

        plot_tiling(tiling, args.plot)


def cmd_fit(args, cfg: RunConfig) -> None:
    from .refine import dense_samples, fit_sweep

    reps = fit_sweep(list(range(1, cfg.fit_degree + 1)), dense_samples())
    obj = reps[-1].to_json()
    obj["series"] = [{"degree": r.degree, "dev": r.dev} for r in reps]
    _emit(_json(obj), cfg.output_path, Format.JSON)
    if args.plot:
        from .figures import plot_fit

        plot_fit(reps, args.plot)


def cmd_map(args, cfg: RunConfig) -> None:
    from .pentagon import parse_sheet
    from .refine import default_fit, map_batch_csv

    C = default_fit(cfg.fit_degree)
    if args.batch:
        pts = []
        for row in Path(args.batch).read_text().splitlines():
            row = row.strip()
            if not row or row.startswith("#") or row.lower().startswith("xi"):
                continue
            xi, eta, *rest = [s.strip() for s in row.split(",")]
            pts.append((float(xi), float(eta), parse_sheet(rest[0] if rest else "-")))
    elif args.xi is not None and args.eta is not None:
        pts = [(args.xi, args.eta, parse_sheet(args.sheet))]
    else:
        raise UsageError("map needs --xi and --eta, or --batch")
    _emit(map_batch_csv(pts, C), cfg.output_path, Format.CSV)


def cmd_scale_grid(args, cfg: RunConfig) -> None:
    from .refine import default_fit, scale_grid_csv, target_Hout

    C = default_fit(cfg.fit_degree)
    text = scale_grid_csv(args.n, C)
    _emit(text, cfg.output_path, Format.CSV)
    if args.plot:
        from .figures import plot_scale

        d = _read_csv(text)
        plot_scale(d[:, 2] + 1j * d[:, 3], d[:, 4], args.plot, target_Hout())


def cmd_verify(args, cfg: RunConfig) -> int:
    from .acceptance import run_all

    results = run_all(args.only, echo=lambda s: print(s, flush=True))
    failed = [c.number for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if cfg.output_path:
        _emit(_json({"schema": "pentamap/1", "criteria": [c.to_json() for c in results]}),
              cfg.output_path, Format.JSON)
    return EXIT_INTERNAL if failed else EXIT_OK


def cmd_report(args, cfg: RunConfig) -> None:
    """Every data file with its figure, into one directory."""
    out = Path(args.out_dir)
    jobs = [
        ("curvature-grid", ["--step", "2"], "curvature.csv", "curvature.png"),
        ("metric-grid", ["--step", "15"], "metric.csv", "metric.png"),
        ("boundaries", [], "boundaries.json", "boundaries.png"),
        ("chart", ["--step", "5"], "chart.csv", "chart.png"),
        ("tile", [], "tiling.json", "tiling.png"),
        ("tile", ["--format", "svg"], "tiling.svg", None),
        ("fit", ["--degree", "30"], "fit.json", "fit.png"),
        ("scale-grid", [], "scale.csv", "scale.png"),
    ]
    for cmd, extra, data, fig in jobs:
        argv = [cmd, *extra, "--out", str(out / data)]
        if fig:
            argv += ["--plot", str(out / fig)]
        print(f"{cmd} -> {out / data}", flush=True)
        code = run(argv)
        if code:
            raise RuntimeError(f"{cmd} failed with exit code {code}")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pentamap", description="Equilateral pentagon moduli space: data, tiling and conformal map.")
    p.add_argument("--version", action="version", version=STAMP)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, fn, help_, out=True, step=None, plot=True):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        if out:
            sp.add_argument("--out", type=Path, help="output file (default: stdout)")
        if step is not None:
            sp.add_argument("--step", type=float, default=step, help="grid spacing in degrees")
        if plot:
            sp.add_argument("--plot", type=Path, help="also render a figure to this file")
        return sp

    sp = add("pentagon", cmd_pentagon, "phases, class and closure residual at a chart point", plot=False)
    sp.add_argument("--xi", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--sheet", default="-")
    add("curvature-grid", cmd_curvature_grid, "Gaussian curvature over the chart", step=5.0)
    add("metric-grid", cmd_metric_grid, "chart metric and unit ellipses", step=15.0)
    sp = add("boundaries", cmd_boundaries, "traced tract boundary loci")
    sp.add_argument("--trace-step", dest="step", type=float, default=0.01, help="tracer step (radians)")
    sp = add("chart", cmd_chart, "isothermal images of a dot grid (or the tract sides)", step=5.0)
    sp.add_argument("--tract", action="store_true", help="emit the fundamental tract sides instead")
    sp.add_argument("--rtol", type=float, default=1e-10, help="ODE relative tolerance")
    sp = add("tile", cmd_tile, "the 240-tract icosagon")
    sp.add_argument("--format", choices=["json", "svg"], default="json")
    sp = add("fit", cmd_fit, "polynomial refinement sweep up to a degree")
    sp.add_argument("--degree", type=int, default=20)
    sp = add("map", cmd_map, "disk position of pentagons", plot=False)
    sp.add_argument("--xi", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--sheet", default="-")
    sp.add_argument("--batch", type=Path, help="CSV of xi_deg, eta_deg[, sheet]")
    sp.add_argument("--degree", type=int, default=20)
    sp = add("scale-grid", cmd_scale_grid, "scale factor over a tract grid")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--degree", type=int, default=20)
    sp = add("verify", cmd_verify, "run the acceptance criteria", plot=False)
    sp.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    sp = sub.add_parser("report", help="write every data file and figure to a directory")
    sp.set_defaults(func=cmd_report)
    sp.add_argument("out_dir", type=Path)
    return p


def _config(args) -> RunConfig:
    fmt = getattr(args, "format", None)
    return RunConfig(
        command=args.command,
        grid_spacing_deg=getattr(args, "step", None) or 5.0,
        output_path=getattr(args, "out", None),
        format=Format(fmt) if fmt else Format.JSON,
        ode_rel_tol=getattr(args, "rtol", 1e-10),
        fit_degree=getattr(args, "degree", 20),
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        code = args.func(args, cfg)
        return EXIT_OK if code is None else code
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except PentamapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        # bad option values (sheet, degree, spacing) are usage errors
        print(f"pentamap: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
