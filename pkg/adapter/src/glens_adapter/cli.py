"""Command-line entry: run inference (real or mock) over a task file."""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import __version__
from .errors import AdapterError, UnsupportedTokenizer
from .mock_model import MOCK_MODES
from .prompts import TEMPLATE_IDS
from .runner import AdapterConfig, run_inference


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glens-adapter",
        description="Run GUI grounding inference and emit prediction records",
    )
    parser.add_argument("--version", action="version",
                        version=f"glens-adapter {__version__}")
    parser.add_argument("--tasks", required=True, help="tasks JSONL from gen-scenes")
    parser.add_argument("--out", required=True, help="output predictions JSONL")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="model identifier (transformers)")
    group.add_argument("--mock", choices=MOCK_MODES, help="deterministic mock mode")
    parser.add_argument("--template", choices=TEMPLATE_IDS, default="showui")
    parser.add_argument("--scenes", help="scene directory (ground-truth mock modes)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--resume", action="store_true",
                        help="skip scene_ids already present in the output")
    parser.add_argument("--pass", dest="pass_mode", choices=["full", "crop"],
                        default="full")
    parser.add_argument("--max-new-tokens", type=int, default=32)
    parser.add_argument("--device", help="device hint, e.g. cuda or cpu")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = AdapterConfig(
        tasks_path=args.tasks,
        output_path=args.out,
        model=args.model,
        mock_mode=args.mock,
        template_id=args.template,
        device=args.device,
        max_new_tokens=args.max_new_tokens,
        pass_mode=args.pass_mode,
        scenes_dir=args.scenes,
        seed=args.seed,
        resume=args.resume,
    )
    try:
        n_ok, n_failed = run_inference(cfg)
    except UnsupportedTokenizer as exc:
        # enforced before inference starts; nothing is written
        print(f"unsupported tokenizer: {exc}", file=sys.stderr)
        return 1
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {n_ok + n_failed} records ({n_failed} failure(s)) to {args.out}")
    return 2 if n_failed else 0


if __name__ == "__main__":
    sys.exit(main())
