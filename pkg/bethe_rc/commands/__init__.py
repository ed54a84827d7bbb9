"""Subcommands; each module exposes register(subparsers)."""

import logging
from pathlib import Path
from typing import Optional, Tuple

from pydantic import ValidationError

from bethe_rc.errors import UsageError
from bethe_rc.models import Partition, SectorCensus
from bethe_rc.schemas import CensusDocument, SolverConfig
from bethe_rc.storage import file_hash, load_census, render_json, write_json

logger = logging.getLogger(__name__)


def emit(args, payload: dict, text: str) -> str:
    """Print JSON or text; with --out the JSON goes to the file as well"""
    rendered = render_json(payload)
    if args.out is not None:
        digest = write_json(args.out, payload)
        record_output(args, args.out, digest)
        logger.info("wrote %s (sha256 %s)", args.out, digest)
    print(rendered if args.json else text)
    return rendered


def record_output(args, path, digest: str):
    outputs = getattr(args, "outputs", None)
    if outputs is not None:
        outputs[str(path)] = digest


def read_census(args, path: Path) -> Tuple[SectorCensus, CensusDocument]:
    """Load a census and remember its hash for the run manifest"""
    census, document = load_census(path)
    inputs = getattr(args, "inputs", None)
    if inputs is not None:
        inputs[str(path)] = file_hash(path)
    if getattr(args, "config", None) is None:
        args.config = document.config
    return census, document


def parse_content(text: Optional[str]) -> Optional[Partition]:
    if text is None:
        return None
    try:
        return Partition.parse(text)
    except ValueError as exc:
        raise UsageError(f"invalid content {text!r}: {exc}") from exc


def solver_config(args, **overrides) -> SolverConfig:
    """SolverConfig from the global flags plus command specific overrides"""
    fields = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "precision", None) is not None:
        fields["precision_mode"] = args.precision
    if getattr(args, "threads", None) is not None:
        fields["threads"] = args.threads
    try:
        cfg = SolverConfig(**fields)
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc
    args.config = cfg
    return cfg


def check_sector(n: int, ell: int):
    if n < 1 or ell < 1 or 2 * ell > n:
        raise UsageError(f"need N >= 1 and 1 <= ell <= N/2, got N={n} ell={ell}")
