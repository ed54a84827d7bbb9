import logging
from datetime import datetime, timezone

from bethe_rc.commands import check_sector, emit, parse_content, record_output, solver_config
from bethe_rc.errors import IncompleteCensus, UsageError
from bethe_rc.solver import solve_sector
from bethe_rc.storage import census_to_document, file_hash, make_manifest, save_census

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("solve", help="solve the Bethe equations of a sector")
    parser.add_argument("--n", type=int, required=True, help="number of sites")
    parser.add_argument("--ell", type=int, required=True, help="number of down spins")
    parser.add_argument("--content", help="keep only solutions of this string content")
    parser.add_argument("--rng-seed", type=int, help="seed of the random restarts")
    parser.add_argument("--max-seeds", type=int, help="cap on the number of seeds")
    parser.add_argument("--random-restarts", type=int, help="number of random seeds")
    parser.add_argument("--seed-grid", help="real seed grid as LOW,HIGH,STEP")
    parser.add_argument("--no-escalate", action="store_true", help="skip the denser second pass")
    parser.add_argument("--center-key", action="store_true", help="record the middle-member ordering key in the census")
    parser.set_defaults(handler=run)


def run(args) -> int:
    started = datetime.now(timezone.utc)
    check_sector(args.n, args.ell)
    content = parse_content(args.content)
    cfg = solver_config(
        args,
        rng_seed=args.rng_seed,
        max_seeds=args.max_seeds,
        random_restarts=args.random_restarts,
        seed_grid=_parse_grid(args.seed_grid),
        escalate=False if args.no_escalate else None,
        use_center_key=True if args.center_key else None,
    )
    census = solve_sector(args.n, args.ell, cfg, content)
    document = census_to_document(census, cfg)
    if args.out is not None:
        manifest = make_manifest(cfg, started, getattr(args, "command_line", None))
        document = save_census(document, args.out, manifest)
        record_output(args, args.out, file_hash(args.out))
        args = _without_out(args)

    counts = census.counts
    text = (
        f"N={args.n} ell={args.ell}: {len(census.solutions)} solutions "
        f"({counts['real']} real, {counts['complex']} complex, {counts['singular']} singular), "
        f"physical {counts['physical']}/{census.rc_count}"
    )
    emit(args, document.model_dump(mode="json", by_alias=True), text)
    if counts["physical"] < census.rc_count:
        raise IncompleteCensus(f"found {counts['physical']} physical solutions for {census.rc_count} rigged configurations")
    return 0


def _parse_grid(text):
    if text is None:
        return None
    try:
        low, high, step = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise UsageError(f"invalid seed grid {text!r}, expected LOW,HIGH,STEP") from exc
    return (low, high, step)


def _without_out(args):
    copy = type(args)(**vars(args))
    copy.out = None
    return copy
