from pathlib import Path
from typing import Dict, List

from bethe_rc.commands import emit, read_census
from bethe_rc.errors import DecompositionError
from bethe_rc.models import Partition, SectorCensus, SectorShape
from bethe_rc.rigged import to_record
from bethe_rc.schemas import AssignmentDocument, AssignmentEntry
from bethe_rc.solver import census_report, render_report
from bethe_rc.strings import classify_census, infer_content, key_convention_agrees, order_indices


def register(subparsers):
    parser = subparsers.add_parser("classify", help="assign rigged configurations to a solved census")
    parser.add_argument("--census", type=Path, required=True, help="census JSON written by solve")
    parser.add_argument("--center-key", action="store_true", help="order by the middle member of odd strings")
    parser.add_argument("--check-keys", action="store_true", help="compare both ordering conventions")
    parser.set_defaults(handler=run)


def _content_of(census: SectorCensus, index: int):
    try:
        return infer_content(census.solutions[index])
    except DecompositionError:
        return None


def census_to_assignment(census: SectorCensus, agrees=None, use_center_key: bool = False) -> AssignmentDocument:
    """Convert a classified census to its assignment document"""
    shape = SectorShape.spin_half(census.n_sites)
    contents = {i: _content_of(census, i) for i in range(len(census.solutions))}
    exceptional = set(census.exceptional)

    # Exceptional solutions are reported by their position in their content's ordered list
    positions: List[int] = []
    groups: Dict[Partition, List[int]] = {}
    for i in exceptional:
        if contents[i] is not None:
            groups.setdefault(contents[i], [])
    for content in groups:
        members = [
            i for i, s in enumerate(census.solutions) if contents[i] == content and s.classification.is_physical
        ]
        ordered = order_indices(census, members, content, use_center_key)
        positions.extend(ordered.index(i) + 1 for i in exceptional if i in ordered)

    entries = []
    for i, sol in enumerate(census.solutions):
        rc = census.assignment.get(i)
        entries.append(
            AssignmentEntry(
                index=i,
                roots=[(z.real, z.imag) for z in sol.roots],
                content=None if contents[i] is None else list(contents[i].parts),
                rc=None if rc is None else to_record(rc, shape),
                exceptional=True if i in exceptional else None,
            )
        )
    return AssignmentDocument(
        n=census.n_sites,
        ell=census.ell,
        entries=entries,
        exceptional=sorted(positions),
        heuristic_contents=list(census.heuristic_contents),
        key_convention_agrees=agrees,
    )


def run(args) -> int:
    census, stored = read_census(args, args.census)
    use_center = args.center_key or stored.config.use_center_key
    classified = classify_census(census, use_center)
    agrees = key_convention_agrees(census) if args.check_keys else None
    document = census_to_assignment(classified, agrees, use_center)
    text = render_report(census_report(classified, use_center))
    if document.exceptional:
        text += "\n\nexceptional positions: " + ", ".join(str(p) for p in document.exceptional)
    if agrees is not None:
        text += f"\nordering conventions agree: {agrees}"
    emit(args, document.model_dump(mode="json"), text)
    return 0
