"""Bridge CLI: `scene-bridge extract --image PATH --out PATH`."""
from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import BridgeError
from .extract import ExtractOptions, extract_scene


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scene-bridge",
        description="Convert RGB tabletop photographs into scene JSON")
    sub = parser.add_subparsers(dest="command", required=True)
    extract = sub.add_parser("extract", help="image -> scene JSON")
    extract.add_argument("--image", required=True, help="input RGB image path")
    extract.add_argument("--out", required=True, help="output scene JSON path")
    extract.add_argument("--fx", type=float, default=500.0)
    extract.add_argument("--fy", type=float, default=500.0)
    extract.add_argument("--table-depth", type=float, default=0.5,
                         help="camera-to-table distance in meters")
    extract.add_argument("--edge-band", type=int, default=6,
                         help="table edge band thickness in pixels")
    extract.add_argument("--stationary", nargs="*", default=None,
                         help="class nouns exported as not movable")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    options = ExtractOptions(fx=args.fx, fy=args.fy,
                             table_depth_m=args.table_depth,
                             edge_band_thickness=args.edge_band)
    if args.stationary is not None:
        options = dataclasses.replace(
            options, stationary_nouns=frozenset(args.stationary))
    try:
        doc = extract_scene(args.image, args.out, options)
    except (BridgeError, OSError) as err:
        print(f"error: {err.__class__.__name__}: {err}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} with {len(doc['objects'])} objects")
    return 0


if __name__ == "__main__":
    sys.exit(main())
