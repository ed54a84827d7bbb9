"""JSON persistence of censuses with an embedded run manifest."""

import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional, Tuple

import mpmath
from pydantic import ValidationError

from bethe_rc import __version__
from bethe_rc.errors import CensusIntegrityError, CensusReadError
from bethe_rc.models import BetheSolution, Partition, SectorCensus
from bethe_rc.schemas import CensusDocument, RunManifest, SolutionRecord, SolverConfig

logger = logging.getLogger(__name__)


def solution_to_record(sol: BetheSolution, dps: int = 40) -> SolutionRecord:
    """Convert a solution to its wire record"""
    extended = None
    if sol.precise is not None:
        with mpmath.workdps(dps):
            extended = [(mpmath.nstr(z.real, dps), mpmath.nstr(z.imag, dps)) for z in sol.precise]
    return SolutionRecord(
        n=sol.n_sites,
        ell=sol.ell,
        roots=[(z.real, z.imag) for z in sol.roots],
        residual=sol.residual_norm,
        classification=sol.classification.value,
        roots_extended=extended,
    )


def record_to_solution(record: SolutionRecord, dps: int = 40) -> BetheSolution:
    precise = None
    if record.roots_extended is not None:
        with mpmath.workdps(dps):
            precise = tuple(mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im)) for re, im in record.roots_extended)
    return BetheSolution(
        n_sites=record.n,
        roots=tuple(complex(re, im) for re, im in record.roots),
        residual_norm=record.residual,
        classification=record.classification,
        precise=precise,
    )


def content_hash(document: CensusDocument) -> str:
    """sha256 of the canonical JSON of everything but the manifest"""
    payload = document.model_dump(mode="json", by_alias=True, exclude={"manifest"})
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def file_hash(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def census_to_document(census: SectorCensus, cfg: SolverConfig) -> CensusDocument:
    return CensusDocument(
        n=census.n_sites,
        ell=census.ell,
        content_filter=None if census.content_filter is None else list(census.content_filter.parts),
        config=cfg,
        counts=census.counts,
        rc_count=census.rc_count,
        solutions=[solution_to_record(s) for s in census.solutions],
    )


def document_to_census(document: CensusDocument) -> SectorCensus:
    return SectorCensus(
        n_sites=document.n,
        ell=document.ell,
        solutions=tuple(record_to_solution(r) for r in document.solutions),
        rc_count=document.rc_count,
        content_filter=None if document.content_filter is None else Partition(tuple(document.content_filter)),
    )


def make_manifest(
    cfg: Optional[SolverConfig],
    started_at: datetime,
    argv: Optional[list] = None,
    inputs: Optional[Dict[str, str]] = None,
    outputs: Optional[Dict[str, str]] = None,
) -> RunManifest:
    """Provenance of one run; inputs and outputs map file paths to sha256"""
    return RunManifest(
        command_line=list(sys.argv if argv is None else argv),
        config=None if cfg is None else cfg.model_dump(mode="json"),
        started_at=started_at,
        finished_at=datetime.now(timezone.utc),
        version=__version__,
        input_hashes=dict(inputs or {}),
        output_hashes=dict(outputs or {}),
    )


def render_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)


def write_json(path: Path, payload: dict) -> str:
    """Write sorted, indented JSON and return its sha256"""
    text = render_json(payload) + "\n"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def write_manifest(path: Path, manifest: RunManifest) -> str:
    return write_json(path, manifest.model_dump(mode="json"))


def save_census(document: CensusDocument, path: Path, manifest: RunManifest) -> CensusDocument:
    """Embed the manifest with the content hash and write the document"""
    manifest = manifest.model_copy(update={"content_sha256": content_hash(document)})
    document = document.model_copy(update={"manifest": manifest})
    digest = write_json(path, document.model_dump(mode="json", by_alias=True))
    logger.info("wrote census with %d solutions to %s (sha256 %s)", len(document.solutions), path, digest)
    return document


def load_census(path: Path, verify: bool = True) -> Tuple[SectorCensus, CensusDocument]:
    try:
        document = CensusDocument.model_validate_json(Path(path).read_text())
    except OSError as exc:
        raise CensusReadError(f"{path}: {exc.strerror or exc}") from exc
    except ValidationError as exc:
        raise CensusReadError(f"{path} is not a census document: {exc.error_count()} validation errors") from exc
    if verify and document.manifest is not None and document.manifest.content_sha256 is not None:
        actual = content_hash(document)
        if actual != document.manifest.content_sha256:
            raise CensusIntegrityError(
                f"{path}: content hash {actual} does not match manifest {document.manifest.content_sha256}"
            )
    return document_to_census(document), document
