import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import List, Optional

# Allow running this file directly (python bethe_rc/main.py) by ensuring project root on sys.path
if __package__ in (None, ""):
    current_dir = os.path.dirname(__file__)
    project_root = os.path.dirname(current_dir)
    if project_root not in sys.path:
        sys.path.insert(0, project_root)

from bethe_rc import __version__
from bethe_rc.commands import classify, quintic, report, solve, verify
from bethe_rc.commands import enumerate as enum
from bethe_rc.config import DEFAULT_PRECISION, LOG_LEVEL
from bethe_rc.errors import BetheRCError, UsageError
from bethe_rc.schemas import ErrorResponse
from bethe_rc.storage import make_manifest, write_manifest

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument errors become UsageError instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bethe-rc",
        description="Bethe ansatz solutions of the spin-1/2 XXX chain and their rigged configurations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--precision", choices=["standard", "extended"], default=None,
                        help=f"arithmetic of the solver (default {DEFAULT_PRECISION})")
    parser.add_argument("--json", action="store_true", help="print JSON instead of text")
    parser.add_argument("--out", help="also write the JSON result to this path")
    parser.add_argument("--manifest", help="write a run manifest with input and output hashes to this path")
    parser.add_argument("--threads", type=int, default=None, help="worker processes for the seed pool")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (enum, solve, classify, verify, report, quintic):
        module.register(subparsers)
    return parser


def configure_logging(verbosity: int):
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    as_json = "--json" in (sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.verbose)
        args.inputs, args.outputs = {}, {}
        args.command_line = ["bethe-rc", *(sys.argv[1:] if argv is None else argv)]
        started = datetime.now(timezone.utc)
        status = args.handler(args)
        if args.manifest is not None:
            manifest = make_manifest(
                getattr(args, "config", None), started, args.command_line, args.inputs, args.outputs
            )
            digest = write_manifest(args.manifest, manifest)
            logger.info("wrote manifest %s (sha256 %s)", args.manifest, digest)
        return status
    except BetheRCError as exc:
        if as_json:
            error = ErrorResponse(title=exc.title, status=exc.status, detail=exc.detail)
            print(json.dumps(error.model_dump(), indent=2), file=sys.stderr)
        else:
            print(f"{exc.title}: {exc.detail}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    raise SystemExit(main())
