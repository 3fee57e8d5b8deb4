"""Command line front end: one `score` subcommand."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import EXIT_OK, ExtractorError
from .scoring import score_comments

log = logging.getLogger("affect_extractor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affect-extractor",
        description="Score raw comment CSVs into affect feature CSVs with pretrained classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    score = sub.add_parser("score", help="score a comment CSV into an affect CSV")
    score.add_argument("--in", dest="input", required=True, metavar="CSV",
                       help="comment CSV with header timestamp,source,channel,text")
    score.add_argument("--out", dest="output", required=True, metavar="CSV",
                       help="affect CSV to write; a .skipped.log sidecar lands next to it")
    score.add_argument("--sentiment-model", required=True, metavar="ID",
                       help="checkpoint id or local directory for the polarity classifier")
    score.add_argument("--emotion-model", required=True, metavar="ID",
                       help="checkpoint id or local directory for the emotion classifier")
    score.add_argument("--offline", action="store_true",
                       help="resolve models from local files only, never the hub")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        summary = score_comments(
            args.input,
            args.output,
            sentiment_model=args.sentiment_model,
            emotion_model=args.emotion_model,
            offline=args.offline,
        )
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    log.info(
        "wrote %d rows to %s (skipped %d, see %s)",
        summary.rows_written, summary.output_path, summary.rows_skipped, summary.sidecar_path,
    )
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
