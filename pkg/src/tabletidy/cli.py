"""Command-line interface.

Subcommands:
  run          full pipeline: scene file -> plan, renders, audit log
  eval-missing missing-object benchmark over one or more bundles
  baseline     random / geometric full-scene baselines
  render       rasterize a saved layout JSON to a P6 pixmap

Exit codes: 0 success, 2 invalid input, 3 provider failure, 4 planning or
layout failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

from .errors import (
    DoesNotFit,
    FixtureExhausted,
    IoFailure,
    MalformedCandidate,
    NoFreePose,
    NoIntermediateSpace,
    NoValidCandidate,
    OutOfBounds,
    PipelineStageError,
    PlacementFailed,
    ProviderUnavailable,
    SceneValidationError,
    SymmetryWarning,
    TableTidyError,
    UnknownObject,
    Unresolvable,
)
from .evaluation import EvalBundle, baseline_geometric, baseline_random
from .layout import Layout, layout_from_scene
from .pipeline import (
    PipelineConfig,
    geometric_predictor,
    pipeline_predictor,
    random_predictor,
    run_missing_object_eval,
    run_pipeline,
)
from .providers import make_provider
from .render import render_layout
from .scene import load_scene

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_PROVIDER_FAILURE = 3
EXIT_PLANNING_FAILURE = 4

_INPUT_ERRORS = (SceneValidationError, json.JSONDecodeError, FileNotFoundError,
                 ValueError, OSError)
_PROVIDER_ERRORS = (ProviderUnavailable, MalformedCandidate, FixtureExhausted,
                    NoValidCandidate)
_PLANNING_ERRORS = (Unresolvable, OutOfBounds, NoIntermediateSpace, UnknownObject,
                    PlacementFailed, DoesNotFit, NoFreePose, IoFailure)


def _classify(err: BaseException) -> int:
    if isinstance(err, PipelineStageError):
        return _classify(err.cause)
    if isinstance(err, _PROVIDER_ERRORS):
        return EXIT_PROVIDER_FAILURE
    if isinstance(err, _PLANNING_ERRORS):
        return EXIT_PLANNING_FAILURE
    if isinstance(err, _INPUT_ERRORS):
        return EXIT_INVALID_INPUT
    return EXIT_INVALID_INPUT


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    overrides = {}
    if getattr(args, "provider", None):
        overrides["provider"] = args.provider
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_run(args) -> int:
    config = _load_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("always", SymmetryWarning)
        result = run_pipeline(args.scene, config, out_dir=args.out)
    print(f"prompt: {result.prompt.text}")
    if result.selection is not None:
        print(f"selected candidate: {result.selection.candidate.source_tag}")
    print(f"moves: {len(result.plan.moves)}")
    print(f"simulation valid: {result.report.valid}")
    if args.out:
        print(f"artifacts written to {args.out}")
    return EXIT_OK if result.report.valid else EXIT_PLANNING_FAILURE


def _cmd_baseline(args) -> int:
    scene = load_scene(args.scene)
    if args.method == "random":
        layout = baseline_random(scene, rng_seed=args.seed or 0)
    else:
        layout = baseline_geometric(scene)
    out = Path(args.out or f"baseline_{args.method}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "layout.json").write_text(
        json.dumps(layout.to_json(), indent=2, sort_keys=True) + "\n")
    render_layout(layout, out / "layout.ppm", markers=True)
    print(f"baseline {args.method} written to {out}")
    return EXIT_OK


def _cmd_eval_missing(args) -> int:
    config = _load_config(args)
    bundles = []
    for path in args.bundle:
        with open(path) as fh:
            bundles.append(EvalBundle.from_json(json.load(fh)))
    methods = {
        "random": random_predictor(seed=config.seed, margin=config.margin),
        "geometric": geometric_predictor(margin=config.margin),
        "pipeline": pipeline_predictor(
            lambda: make_provider(config.provider), config),
    }
    if args.method:
        methods = {name: methods[name] for name in args.method}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SymmetryWarning)
        report = run_missing_object_eval(bundles, methods)
    from .evaluation import format_report_table
    table = format_report_table(report)
    print(table)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc = {
            method: {noun: summary.to_json() for noun, summary in cells.items()}
            for method, cells in report.items()
        }
        (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        (out / "report.txt").write_text(table + "\n")
        print(f"report written to {out}")
    return EXIT_OK


def _cmd_render(args) -> int:
    if args.layout:
        with open(args.layout) as fh:
            layout = Layout.from_json(json.load(fh))
    else:
        layout = layout_from_scene(load_scene(args.scene))
    render_layout(layout, args.out, markers=not args.no_markers)
    print(f"render written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabletidy",
        description="Tabletop rearrangement planning from generated goal images")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline on a scene file")
    run.add_argument("--scene", required=True, help="scene JSON path")
    run.add_argument("--provider",
                     help="fixture:DIR | synthetic:NAME | http:URL")
    run.add_argument("--out", help="artifact output directory")
    run.add_argument("--seed", type=int, help="generation seed")
    run.add_argument("--config", help="pipeline config JSON path")
    run.set_defaults(func=_cmd_run)

    baseline = sub.add_parser("baseline", help="zero-shot baseline layouts")
    baseline.add_argument("method", choices=["random", "geometric"])
    baseline.add_argument("--scene", required=True)
    baseline.add_argument("--out")
    baseline.add_argument("--seed", type=int)
    baseline.set_defaults(func=_cmd_baseline)

    ev = sub.add_parser("eval-missing",
                        help="missing-object benchmark on eval bundles")
    ev.add_argument("--bundle", required=True, nargs="+",
                    help="eval bundle JSON path(s)")
    ev.add_argument("--method", nargs="*",
                    choices=["random", "geometric", "pipeline"],
                    help="subset of methods (default: all)")
    ev.add_argument("--provider")
    ev.add_argument("--out")
    ev.add_argument("--seed", type=int)
    ev.add_argument("--config")
    ev.set_defaults(func=_cmd_eval_missing)

    render = sub.add_parser("render", help="rasterize a layout to a P6 pixmap")
    render.add_argument("--scene", help="scene JSON (renders its initial layout)")
    render.add_argument("--layout", help="layout JSON (takes precedence)")
    render.add_argument("--out", required=True, help="output .ppm path")
    render.add_argument("--no-markers", action="store_true")
    render.set_defaults(func=_cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "render" and not (args.scene or args.layout):
        parser.error("render needs --scene or --layout")
    try:
        return args.func(args)
    except PipelineStageError as err:
        print(f"error at stage {err.stage}: {err.cause.__class__.__name__}: "
              f"{err.cause}", file=sys.stderr)
        return _classify(err)
    except (TableTidyError, *_INPUT_ERRORS) as err:
        print(f"error: {err.__class__.__name__}: {err}", file=sys.stderr)
        return _classify(err)


if __name__ == "__main__":
    sys.exit(main())
