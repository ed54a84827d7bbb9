from bethe_rc.commands import check_sector, emit, parse_content
from bethe_rc.models import SectorShape
from bethe_rc.rigged import (
    count_rigged_configs_by_content,
    enumerate_rigged_configs,
    render_diagram,
    to_record,
)


def register(subparsers):
    parser = subparsers.add_parser("enum", help="list rigged configurations of a sector")
    parser.add_argument("--n", type=int, required=True, help="number of sites")
    parser.add_argument("--ell", type=int, required=True, help="number of down spins")
    parser.add_argument("--content", help="restrict to one partition, e.g. 3,2,1")
    parser.add_argument("--diagrams", action="store_true", help="draw every configuration")
    parser.set_defaults(handler=run)


def run(args) -> int:
    check_sector(args.n, args.ell)
    shape = SectorShape.spin_half(args.n)
    content = parse_content(args.content)
    configs = enumerate_rigged_configs(shape, args.ell, content)
    by_content = count_rigged_configs_by_content(shape, args.ell)

    payload = {
        "n": args.n,
        "ell": args.ell,
        "content": None if content is None else list(content.parts),
        "count": len(configs),
        "by_content": {str(nu): count for nu, count in by_content.items()},
        "configurations": [to_record(rc, shape).model_dump() for rc in configs],
    }
    lines = [f"N={args.n} ell={args.ell}: {len(configs)} rigged configurations"]
    for rc in configs:
        lines.append(str(rc))
        if args.diagrams:
            lines.append(render_diagram(rc, shape))
            lines.append("")
    emit(args, payload, "\n".join(lines))
    return 0
