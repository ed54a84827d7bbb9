import cmath
from pathlib import Path
from typing import List, Optional

from bethe_rc.bethe import energy, make_solution, nw_criterion
from bethe_rc.commands import emit, read_census
from bethe_rc.errors import UsageError
from bethe_rc.models import BetheSolution, SectorCensus
from bethe_rc.solver import polynomial_roots
from bethe_rc.strings import classify_census

# Roots xi give the N=12 singular solutions {0, +-sqrt(xi), +-i/2}
QUINTIC = (5120.0, 11520.0, -4992.0, -9312.0, 2020.0, -55.0)
QUINTIC_SITES = 12


def register(subparsers):
    parser = subparsers.add_parser("quintic", help="singular N=12 solutions from the sextic reduction")
    parser.add_argument("--coeffs", help="comma separated coefficients, leading first")
    parser.add_argument("--n", type=int, default=QUINTIC_SITES, help="number of sites")
    parser.add_argument("--census", type=Path, help="solved N=12 ell=5 census to look the rigged configurations up in")
    parser.set_defaults(handler=run)


def completed_solutions(coeffs=QUINTIC, n: int = QUINTIC_SITES) -> List[BetheSolution]:
    """One singular solution per polynomial root"""
    out = []
    for xi in polynomial_roots(coeffs):
        root = cmath.sqrt(xi)
        out.append(make_solution((0.0, root, -root, 0.5j, -0.5j), n))
    return out


def _lookup(census: Optional[SectorCensus], sol: BetheSolution):
    if census is None:
        return None
    best = min(range(len(census.solutions)), key=lambda i: census.solutions[i].distance(sol))
    if census.solutions[best].distance(sol) > 1e-6:
        return None
    rc = census.assignment.get(best)
    return None if rc is None else str(rc)


def _parse_coeffs(text: str):
    try:
        return tuple(float(c) for c in text.split(","))
    except ValueError as exc:
        raise UsageError(f"invalid coefficients {text!r}, expected comma separated numbers") from exc


def run(args) -> int:
    coeffs = QUINTIC if args.coeffs is None else _parse_coeffs(args.coeffs)
    census = None
    if args.census is not None:
        census, stored = read_census(args, args.census)
        census = classify_census(census, stored.config.use_center_key)

    rows = []
    for xi, sol in zip(polynomial_roots(coeffs), completed_solutions(coeffs, args.n)):
        rows.append(
            {
                "xi": xi.real,
                "sqrt_xi": [cmath.sqrt(xi).real, cmath.sqrt(xi).imag],
                "roots": [[z.real, z.imag] for z in sol.roots],
                "residual": sol.residual_norm,
                "physical": nw_criterion(sol),
                "energy": energy(sol),
                "rc": _lookup(census, sol),
            }
        )
    lines = []
    for row in rows:
        root = complex(*row["sqrt_xi"])
        lines.append(
            f"xi={row['xi']:+.15f}  sqrt={root.real:.15f}{root.imag:+.15f}i  "
            f"E={row['energy']:.12f}  physical={row['physical']}  residual={row['residual']:.1e}"
            + (f"  {row['rc']}" if row["rc"] else "")
        )
    emit(args, {"n": args.n, "coeffs": list(coeffs), "solutions": rows}, "\n".join(lines))
    return 0
