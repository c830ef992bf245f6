"""Command-line front end.

Subcommands build variant graphs, print cost reports and comparison
tables, compute Pareto fronts and latency projections, and render SVG
scatter plots. Exit codes: 0 success, 1 domain error (one diagnostic
line on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis
from .analysis import (AnalysisError, SCOPES, TimingProfile, amdahl_max,
                       load_points, map_of, pareto_front, project_fps, round2)
from .arch import ArchConfig, ArchError, Variant, build_pointpillars
from .cost import graph_cost
from .graph import GraphError
from .shapes import ShapeError
from .svg import render_scatter

_GIGA = 10 ** 9


class CliError(Exception):
    """Domain error surfaced as exit code 1."""


def _load_config(args: argparse.Namespace) -> ArchConfig:
    cfg = ArchConfig.from_file(args.config) if args.config else ArchConfig()
    if args.set:
        cfg = cfg.with_overrides(args.set)
    return cfg


def _load_data(args: argparse.Namespace) -> list[analysis.DesignPoint]:
    path = Path(args.data) if args.data else analysis.default_dataset_path()
    return load_points(path)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _gmadd_str(madds: int) -> str:
    return f"{round2(Fraction(madds, _GIGA)):.2f}"


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _cmd_list(args: argparse.Namespace) -> None:
    _emit("".join(v.value + "\n" for v in Variant), args.output)


def _cmd_describe(args: argparse.Namespace) -> None:
    variant = Variant.parse(args.variant)
    cfg = _load_config(args)
    graph = build_pointpillars(variant, cfg)
    report = graph_cost(graph, count_batchnorm=not args.fold_batchnorm)
    lines = [f"variant: {variant.value}", f"nodes: {len(report.per_node)}", ""]
    lines.append(f"{'stage':<12} {'MAdd':>16} {'params':>12}")
    for stage, (madds, params) in report.per_stage().items():
        lines.append(f"{stage:<12} {madds:>16} {params:>12}")
    lines.append("")
    lines.append(f"total MAdd:   {report.total_madds} ({_gmadd_str(report.total_madds)} GMAdd)")
    lines.append(f"total params: {report.total_params}")
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_cost(args: argparse.Namespace) -> None:
    variant = Variant.parse(args.variant)
    cfg = _load_config(args)
    graph = build_pointpillars(variant, cfg)
    report = graph_cost(graph, count_batchnorm=not args.fold_batchnorm)
    if args.format == "csv":
        _emit(report.to_csv(), args.output)
        return
    if args.format == "json":
        _emit(report.to_json() + "\n", args.output)
        return
    lines = [f"{'name':<28} {'kind':<16} {'MAdd':>14} {'params':>10}"]
    for cost in report.per_node:
        lines.append(f"{cost.name:<28} {cost.kind:<16} {cost.madds:>14} {cost.params:>10}")
    lines.append(f"TOTAL {_gmadd_str(report.total_madds)} GMAdd")
    lines.append(f"TOTAL {report.total_params} params")
    _emit("\n".join(lines) + "\n", args.output)


def _compare_rows(cfg: ArchConfig, fold_bn: bool) -> list[tuple[str, int, int]]:
    rows = []
    for variant in Variant:
        report = graph_cost(build_pointpillars(variant, cfg),
                            count_batchnorm=not fold_bn)
        rows.append((variant.value, report.total_madds, report.total_params))
    return rows


def _cmd_compare(args: argparse.Namespace) -> None:
    cfg = _load_config(args)
    rows = _compare_rows(cfg, args.fold_batchnorm)
    base = next(m for name, m, _ in rows if name == Variant.BASE.value)
    if args.format == "json":
        doc = [{"name": name, "madds": madds, "params": params,
                "gmadds": _gmadd_str(madds),
                "madd_speedup": f"{round2(Fraction(base, madds)):.2f}"}
               for name, madds, params in rows]
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return
    if args.format == "csv":
        out = ["name,madds,params,gmadds,madd_speedup"]
        for name, madds, params in rows:
            out.append(f"{name},{madds},{params},{_gmadd_str(madds)},"
                       f"{round2(Fraction(base, madds)):.2f}")
        _emit("\n".join(out) + "\n", args.output)
        return
    lines = [f"{'name':<14} {'GMAdd':>8} {'params':>10} {'speedup':>8}"]
    for name, madds, params in rows:
        lines.append(f"{name:<14} {_gmadd_str(madds):>8} {params:>10} "
                     f"{round2(Fraction(base, madds)):>8.2f}")
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_pareto(args: argparse.Namespace) -> None:
    points = _load_data(args)
    front = pareto_front(points, args.scope)
    if args.format == "json":
        _emit(json.dumps({"scope": args.scope, "front": front}, indent=2) + "\n",
              args.output)
        return
    if args.format == "csv":
        by_name = {p.name: p for p in points}
        out = ["name,gmadds,map"]
        for name in front:
            p = by_name[name]
            out.append(f"{name},{round2(p.gmadds):.2f},"
                       f"{round2(map_of(p, args.scope)):.2f}")
        _emit("\n".join(out) + "\n", args.output)
        return
    _emit("".join(name + "\n" for name in front), args.output)


def _parse_speedups(items: list[str]) -> dict[str, Fraction | float]:
    speedups: dict[str, Fraction | float] = {}
    for item in items:
        if "=" not in item:
            raise CliError(f"speedup {item!r} is not of the form stage=value")
        stage, raw = (part.strip() for part in item.split("=", 1))
        if raw.lower() in ("inf", "infinity"):
            speedups[stage] = float("inf")
            continue
        try:
            value = Fraction(raw)
        except (ValueError, ZeroDivisionError) as err:
            raise CliError(f"bad speedup value {raw!r}: {err}") from err
        speedups[stage] = value
    return speedups


def _cmd_amdahl(args: argparse.Namespace) -> None:
    profile = TimingProfile.from_file(args.profile)
    speedups = _parse_speedups(args.speedup or [])
    fps = project_fps(profile, speedups)
    pipeline = fps / profile.base_fps
    rows = [
        ("base_fps", round2(profile.base_fps)),
        ("projected_fps", round2(fps)),
        ("pipeline_speedup", round2(pipeline)),
    ]
    for stage, frac in profile.stage_fractions.items():
        rows.append((f"limit_speedup_{stage}", round2(amdahl_max(frac))))
    if args.format == "json":
        _emit(json.dumps({name: f"{value:.2f}" for name, value in rows},
                         indent=2) + "\n", args.output)
        return
    if args.format == "csv":
        out = ["quantity,value"]
        out += [f"{name},{value:.2f}" for name, value in rows]
        _emit("\n".join(out) + "\n", args.output)
        return
    _emit("".join(f"{name:<22} {value:.2f}\n" for name, value in rows),
          args.output)


def _cmd_plot(args: argparse.Namespace) -> None:
    points = _load_data(args)
    _emit(render_scatter(points, args.scope), args.output)


def _cmd_export(args: argparse.Namespace) -> None:
    variant = Variant.parse(args.variant)
    cfg = _load_config(args)
    graph = build_pointpillars(variant, cfg)
    if args.format == "svg":
        raise CliError("export emits graph structure; use csv or json")
    if args.format == "csv":
        _emit(graph_cost(graph).to_csv(), args.output)
        return
    _emit(graph.to_json() + "\n", args.output)


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="architecture config file (JSON or key = value)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        help="override one config field (repeatable)")
    parser.add_argument("--fold-batchnorm", action="store_true",
                        help="treat batch norm as folded into convolutions")


def _add_io_flags(parser: argparse.ArgumentParser,
                  formats: tuple[str, ...] = ("table", "csv", "json")) -> None:
    parser.add_argument("--format", choices=formats, default=formats[0])
    parser.add_argument("--output", metavar="PATH",
                        help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pillarcost",
        description="Cost-model toolkit for PointPillars backbone variants.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list the supported backbone variants")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("describe", help="per-stage summary of one variant")
    p.add_argument("variant")
    _add_config_flags(p)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=_cmd_describe)

    p = sub.add_parser("cost", help="per-node cost report for one variant")
    p.add_argument("variant")
    _add_config_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("compare", help="cost table over all variants")
    p.add_argument("--metric", choices=("gmadds", "params"), default="gmadds",
                   help="kept for symmetry; both columns are always shown")
    _add_config_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("pareto", help="non-dominated variants for a scope")
    p.add_argument("--scope", choices=SCOPES, default="overall")
    p.add_argument("--data", metavar="PATH",
                   help="design-point dataset (defaults to the shipped one)")
    _add_io_flags(p, formats=("lines", "csv", "json"))
    p.set_defaults(func=_cmd_pareto)

    p = sub.add_parser("amdahl", help="latency projection for stage speedups")
    p.add_argument("--profile", metavar="PATH", required=True,
                   help="timing profile JSON (stage fractions + base latency)")
    p.add_argument("--speedup", metavar="STAGE=VALUE", action="append",
                   help="per-stage speedup, 'inf' allowed (repeatable)")
    _add_io_flags(p)
    p.set_defaults(func=_cmd_amdahl)

    p = sub.add_parser("plot", help="SVG scatter of mAP versus GMAdd")
    p.add_argument("--scope", choices=SCOPES, default="overall")
    p.add_argument("--data", metavar="PATH")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("export", help="emit a variant's graph or cost table")
    p.add_argument("variant")
    _add_config_flags(p)
    _add_io_flags(p, formats=("json", "csv", "svg"))
    p.set_defaults(func=_cmd_export)

    return parser


_DOMAIN_ERRORS = (CliError, ArchError, AnalysisError, GraphError, ShapeError,
                  OSError, json.JSONDecodeError, KeyError, ValueError,
                  ZeroDivisionError)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        args.func(args)
    except _DOMAIN_ERRORS as err:
        message = str(err).replace("\n", " ") or err.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
