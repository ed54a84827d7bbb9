from pathlib import Path

from bethe_rc.commands import emit, read_census
from bethe_rc.solver import census_report, render_report
from bethe_rc.strings import classify_census


def register(subparsers):
    parser = subparsers.add_parser("report", help="print the string tables of a census")
    parser.add_argument("--census", type=Path, required=True, help="census JSON written by solve")
    parser.add_argument("--no-assign", action="store_true", help="skip the rigging assignment")
    parser.set_defaults(handler=run)


def run(args) -> int:
    census, stored = read_census(args, args.census)
    use_center = stored.config.use_center_key
    if not args.no_assign:
        census = classify_census(census, use_center)
    report = census_report(census, use_center)
    emit(args, report, render_report(report))
    return 0
