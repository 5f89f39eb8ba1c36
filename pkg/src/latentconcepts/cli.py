"""Command-line entry point.

Subcommands run the pipeline up to the named stage (each stage writes its
own outputs), `synth` generates a benchmark bundle with ground truth, and
`pipeline` / `report` run everything.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import composition as comp
from . import pipeline as pl
from .errors import DataError, InvariantError, UsageError
from .synth import SynthSpec, generate_synthetic

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentconcepts",
        description="Discover, align and explain latent concepts in "
        "per-layer token embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name: str, helptext: str):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="pipeline TOML config")
        p.add_argument("--out", help="override output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--k", type=int, help="cluster count (default 1000)")
        p.add_argument("--theta", type=float, help="alignment threshold (default 0.9)")
        p.add_argument("--layers", help="comma-separated layer indices")
        p.add_argument("--engine", choices=["nnchain", "naive"])
        p.add_argument("--max-n", type=int, dest="max_n",
                       help="composition search limit (default 6)")
        p.add_argument("--mode", help="composition mode: cross or within:<scheme>")
        p.add_argument("--no-figures", action="store_true")
        return p

    add_run_command("ingest", "load corpus, filter occurrences, export TSV")
    add_run_command("cluster", "cluster each layer, export dendrograms and cuts")
    add_run_command("align", "score clusters against concept schemes")
    add_run_command("compose", "explain clusters with minimal label sets")
    add_run_command("report", "full run plus plot data and figures")
    add_run_command("pipeline", "full run (alias of report)")

    p = sub.add_parser("synth", help="generate a synthetic benchmark bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--clusters", type=int, default=20)
    p.add_argument("--cluster-size", type=int, default=15)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    return parser


_STAGE_OF_COMMAND = {
    "ingest": "ingest",
    "cluster": "cluster",
    "align": "align",
    "compose": "compose",
    "report": "report",
    "pipeline": "report",
}


def _apply_overrides(cfg: pl.PipelineConfig, args) -> pl.PipelineConfig:
    if args.out:
        cfg.output = Path(args.out)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.k is not None:
        cfg.k = args.k
    if args.theta is not None:
        cfg.theta = args.theta
    if args.layers is not None:
        try:
            cfg.layers = [int(x) for x in args.layers.split(",")]
        except ValueError:
            raise UsageError(f"--layers must be comma-separated integers, got {args.layers!r}")
    if args.engine:
        cfg.engine = args.engine
    if args.max_n is not None:
        cfg.max_n = args.max_n
    if args.mode:
        if args.mode == "cross":
            cfg.compose_mode = comp.MODE_CROSS
        elif args.mode.startswith("within:"):
            cfg.compose_mode = args.mode.split(":", 1)[1]
        else:
            raise UsageError(
                f"--mode must be 'cross' or 'within:<scheme>', got {args.mode!r}"
            )
    if args.no_figures:
        cfg.figures = False
    # re-validate after overrides
    cfg.__post_init__()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    try:
        if args.command == "synth":
            spec = SynthSpec.standard(
                layers=args.layers,
                dim=args.dim,
                n_clusters=args.clusters,
                cluster_size=args.cluster_size,
                sigma=args.sigma,
                seed=args.seed,
            )
            paths = generate_synthetic(spec, args.out)
            for name, path in paths.items():
                print(f"{name}: {path}")
            return EXIT_OK

        cfg = _apply_overrides(pl.load_config(args.config), args)
        state = pl.run_pipeline(cfg, upto=_STAGE_OF_COMMAND[args.command])
        if state.overall is not None:
            print(f"overall aligned fraction: {state.overall.overall:.4f}")
        print(f"outputs written to {cfg.output}")
        return EXIT_OK
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, UsageError):
            return EXIT_USAGE
        if isinstance(exc.cause, InvariantError):
            return EXIT_INTERNAL
        return EXIT_DATA
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything unexpected counts as internal
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
