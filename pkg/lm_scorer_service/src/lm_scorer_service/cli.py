"""Launch the scoring service.

    lm-scorer-service --model <hf id or local path> [--host H] [--port P]
                      [--max-total-tokens N]
"""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .scoring import ModelScorer


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lm-scorer-service", description=__doc__)
    parser.add_argument("--model", required=True,
                        help="model identifier or local checkpoint directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--max-total-tokens", type=int, default=1024)
    args = parser.parse_args(argv)

    scorer = ModelScorer(args.model, max_total_tokens=args.max_total_tokens)
    uvicorn.run(create_app(scorer), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
