from pathlib import Path

from bethe_rc.commands import check_sector, emit, read_census, solver_config
from bethe_rc.config import ORACLE_MAX_SITES
from bethe_rc.errors import ResourceError, VerificationMismatch
from bethe_rc.oracle import completeness_check, four_site_singular_deviation
from bethe_rc.solver import solve_sector


def register(subparsers):
    parser = subparsers.add_parser("verify", help="check a census against exact diagonalization")
    parser.add_argument("--n", type=int, required=True, help="number of sites")
    parser.add_argument("--ell", type=int, required=True, help="number of down spins")
    parser.add_argument("--census", type=Path, help="census JSON; solved on the fly when omitted")
    parser.set_defaults(handler=run)


def run(args) -> int:
    check_sector(args.n, args.ell)
    if args.n > ORACLE_MAX_SITES:
        raise ResourceError(f"N={args.n} exceeds the oracle limit of {ORACLE_MAX_SITES} sites")
    if args.census is not None:
        census, _ = read_census(args, args.census)
    else:
        census = solve_sector(args.n, args.ell, solver_config(args))

    report = completeness_check(args.n, args.ell, census)
    if args.n == 4 and args.ell == 2:
        deviation = four_site_singular_deviation()
        report.checks["explicit_singular_vector"] = deviation < 1e-6
        report.passed = report.passed and deviation < 1e-6

    lines = [
        f"N={args.n} ell={args.ell}: {'pass' if report.passed else 'FAIL'}",
        f"physical {report.physical_count}, rigged configurations {report.rc_count}, expected {report.expected_count}",
    ]
    lines += [f"  {name}: {'ok' if ok else 'failed'}" for name, ok in sorted(report.checks.items())]
    if report.unmatched_energies:
        lines.append(f"  energies without an ED partner: {report.unmatched_energies}")
    if report.unmatched_spectrum:
        lines.append(f"  ED energies without a solution: {report.unmatched_spectrum}")
    emit(args, report.model_dump(mode="json"), "\n".join(lines))
    if not report.passed:
        raise VerificationMismatch(f"N={args.n} ell={args.ell} failed checks {report.checks}")
    return 0
