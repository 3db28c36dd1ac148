"""Command-line interface: per-stage subcommands plus the full pipeline run.

Exit codes: 0 ok, 1 the run finished with diagnostics (disconnected graph or
untraversable edges), 2 input or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BridgenavError
from .pipeline import PipelineConfig, RunArtifacts, run_pipeline
from .render import LAYERS, render_svg
from .synth import Shape, StructureSpec, export_fixture, generate

STAGE_FILES = {
    "segment": ("cloud.csv", "clusters.json", "boundaries.json", "diagnostics.json"),
    "graph": ("cloud.csv", "clusters.json", "boundaries.json", "graph.json", "diagnostics.json"),
    "route": ("cloud.csv", "clusters.json", "boundaries.json", "graph.json", "route.json", "diagnostics.json"),
    "plan": None,  # everything
    "run": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridgenav",
        description="Point-cloud to inspection-route pipeline for steel joint structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a labeled synthetic fixture")
    synth.add_argument("--shape", choices=[s.value for s in Shape], default="cross")
    synth.add_argument("--bar-width", type=float, default=0.3)
    synth.add_argument("--bar-length", type=float, action="append", default=None,
                       help="bar length in meters; repeat for per-bar lengths")
    synth.add_argument("--density", type=float, default=4000.0)
    synth.add_argument("--noise", type=float, default=0.005)
    synth.add_argument("--dropout-slope", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--name", default="cloud")
    synth.add_argument("--out", required=True)

    for stage in ("segment", "graph", "route", "plan", "run"):
        p = sub.add_parser(stage, help=f"run the pipeline through the {stage} stage")
        p.add_argument("cloud", help="input cloud (.csv or ascii .ply)")
        p.add_argument("--config", default=None, help="pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", required=True, help="artifact output directory")

    render = sub.add_parser("render", help="render one artifact layer to SVG")
    render.add_argument("artifacts", help="artifact directory written by a pipeline stage")
    render.add_argument("--layer", choices=LAYERS, required=True)
    render.add_argument("--out", required=True, help="output SVG file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except BridgenavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "synth":
        spec = StructureSpec(
            shape=Shape(args.shape),
            bar_width=args.bar_width,
            bar_lengths=args.bar_length or [0.5],
            density=args.density,
            noise_sigma=args.noise,
            dropout_slope=args.dropout_slope,
            seed=args.seed,
        )
        csv_path, truth_path = export_fixture(generate(spec), args.out, args.name)
        print(f"wrote {csv_path} and {truth_path}")
        return 0

    if args.command == "render":
        artifacts = RunArtifacts.load(args.artifacts)
        svg = render_svg(artifacts, args.layer)
        Path(args.out).write_text(svg)
        print(f"wrote {args.out}")
        return 0

    # pipeline stages: each runs the pure chain from the cloud and keeps the
    # files belonging to its stage, so intermediate stages stay debuggable
    config = PipelineConfig() if args.config is None else PipelineConfig.from_json(args.config)
    artifacts = run_pipeline(args.cloud, config, out_dir=args.out, seed=args.seed)
    keep = STAGE_FILES[args.command]
    if keep is not None:
        for f in Path(args.out).iterdir():
            if f.name not in keep:
                f.unlink()
    for message in artifacts.diagnostics:
        print(f"diagnostic: {message}", file=sys.stderr)
    print(
        f"n_o={artifacts.n_o} vertices={len(artifacts.graph.vertices)} "
        f"edges={len(artifacts.graph.edges)} "
        f"route_cost={artifacts.route.total_cost if artifacts.route else 'n/a'} "
        f"paths={len(artifacts.paths)}"
    )
    return artifacts.severity


if __name__ == "__main__":
    sys.exit(main())
