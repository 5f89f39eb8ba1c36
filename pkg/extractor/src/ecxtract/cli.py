"""CLI: ecxtract extract --model <id> --corpus <path> --out <path.ecx>"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .extract import AGGREGATIONS, ExtractionConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecxtract",
        description="Dump all-layer per-word transformer hidden states to ECX.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="run the extraction")
    p.add_argument("--model", required=True, help="model id or local path")
    p.add_argument("--corpus", required=True, help="one sentence per line, UTF-8")
    p.add_argument("--out", required=True, help="output .ecx path")
    p.add_argument("--agg", choices=list(AGGREGATIONS) + ["first_subword"],
                   default="average", help="subword aggregation")
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    agg = "first" if args.agg == "first_subword" else args.agg
    try:
        result = extract(
            ExtractionConfig(
                model=args.model,
                corpus=Path(args.corpus),
                out=Path(args.out),
                aggregation=agg,
                device=args.device,
                batch_size=args.batch_size,
            )
        )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {result.num_records} records "
        f"(L={result.num_layers}, D={result.dim}, skipped {result.skipped}) "
        f"to {result.ecx_path}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
