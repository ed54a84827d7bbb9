"""String decomposition of Bethe roots and rigging assignment for a census.

Solutions of one string content are ordered by the real part of their longest
string. Along that order the riggings of the remaining free rows come in
blocks: within a block the outer rigging is constant and the inner object
moves monotonically to the right. Solutions that break this layout are the
exceptional ones.
"""

import dataclasses
import logging
from collections import Counter
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from bethe_rc.errors import AssignmentError, CountMismatchError, DecompositionError
from bethe_rc.models import (
    BetheSolution,
    Partition,
    RiggedConfiguration,
    RiggingAssignment,
    SectorCensus,
    SectorShape,
    StringDecomposition,
    StringGroup,
)
from bethe_rc.rigged import enumerate_rigged_configs, partitions, vacancy_number

logger = logging.getLogger(__name__)

RUNG_TOL = 0.2
CONJUGATE_TOL = 1e-6
# Contents whose assignment scheme has been checked against published tables
DEMONSTRATED = {(3, 2, 1), (3, 1, 1), (1, 1), (2,)}


# Decomposition
def _deviation(members: Sequence[complex]) -> float:
    """Max distance of the members from the ideal ladder on their mean real part"""
    m = len(members)
    center = sum(z.real for z in members) / m
    ordered = sorted(members, key=lambda z: -z.imag)
    return max(abs(z - complex(center, (m - 1) / 2 - k)) for k, z in enumerate(ordered))


def _self_conjugate(members: Sequence[complex], tol: float = CONJUGATE_TOL) -> bool:
    pool = list(members)
    for z in members:
        match = min(range(len(pool)), key=lambda j: abs(pool[j] - z.conjugate()))
        if abs(pool[match] - z.conjugate()) > tol:
            return False
        pool.pop(match)
    return True


def _make_group(members: Sequence[complex]) -> StringGroup:
    ordered = tuple(sorted(members, key=lambda z: -z.imag))
    return StringGroup(
        length=len(ordered),
        center=sum(z.real for z in ordered) / len(ordered),
        members=ordered,
        deviation=_deviation(ordered),
        self_conjugate=_self_conjugate(ordered),
    )


def _ladders(values: Sequence[complex], top: int, length: int, free: frozenset, reach: float):
    """Index chains starting at top, one rung of -i per step, two nearest choices per rung"""
    if length == 1:
        yield (top,)
        return

    def extend(chain):
        if len(chain) == length:
            yield tuple(chain)
            return
        target = values[chain[-1]] - 1j
        options = sorted((j for j in free if j not in chain), key=lambda j: abs(values[j] - target))[:2]
        for j in options:
            if abs(values[j] - target) <= reach:
                yield from extend(chain + [j])

    yield from extend([top])


def _middle_below_axis(members: Sequence[complex]) -> int:
    m = len(members)
    if m >= 3 and m % 2 == 1:
        return int(sorted(members, key=lambda z: -z.imag)[m // 2].imag < 0)
    return 0


def _match_content(values: Sequence[complex], content: Partition, tol: float) -> Optional[List[tuple]]:
    """Groups of indices realising content with minimum total deviation"""
    limit = 10 * tol
    best: Dict[str, object] = {"cost": None, "groups": None}

    def search(free: frozenset, lengths: Counter, groups: list, total: float, penalty: int):
        if best["cost"] is not None and round(total, 9) > best["cost"][0]:
            return
        if not free:
            cost = (round(total, 9), penalty)
            if best["cost"] is None or cost < best["cost"]:
                best["cost"], best["groups"] = cost, list(groups)
            return
        top = max(free, key=lambda j: (values[j].imag, values[j].real))
        for length in sorted((m for m, c in lengths.items() if c), reverse=True):
            for chain in _ladders(values, top, length, free, limit + 1e-12):
                members = [values[j] for j in chain]
                deviation = _deviation(members)
                if deviation > limit:
                    continue
                lengths[length] -= 1
                groups.append(chain)
                search(free - set(chain), lengths, groups, total + deviation, penalty + _middle_below_axis(members))
                groups.pop()
                lengths[length] += 1

    search(frozenset(range(len(values))), Counter(content.parts), [], 0.0, 0)
    return best["groups"]


def _greedy_content(values: Sequence[complex]) -> Partition:
    """Cluster by real part, then stack each cluster into ladders from the top"""
    order = sorted(range(len(values)), key=lambda j: values[j].real)
    gaps = [values[b].real - values[a].real for a, b in zip(order, order[1:])]
    small = sorted(g for g in gaps if g < 0.05)
    spread = small[len(small) // 2] if small else 0.0
    threshold = max(0.05, 5 * spread)

    clusters, current = [], [order[0]]
    for gap, j in zip(gaps, order[1:]):
        if gap > threshold:
            clusters.append(current)
            current = []
        current.append(j)
    clusters.append(current)

    lengths = []
    for cluster in clusters:
        free = set(cluster)
        while free:
            top = max(free, key=lambda j: (values[j].imag, values[j].real))
            chain = [top]
            while True:
                target = values[chain[-1]] - 1j
                options = [j for j in free if j not in chain and abs(values[j] - target) <= RUNG_TOL]
                if not options:
                    break
                chain.append(min(options, key=lambda j: abs(values[j] - target)))
            if abs(sum(values[j].imag for j in chain) / len(chain)) > RUNG_TOL:
                chain = [top]
            free -= set(chain)
            lengths.append(len(chain))
    return Partition(tuple(sorted(lengths, reverse=True)))


def decompose(sol: BetheSolution, target_content: Optional[Partition] = None, tol: float = RUNG_TOL) -> StringDecomposition:
    """Split the roots into strings; with target_content the best matching grouping is returned"""
    values = list(sol.roots)
    if not _self_conjugate(values, max(CONJUGATE_TOL, 1e-6 * max(abs(z) for z in values))):
        raise DecompositionError(f"roots {values} are not closed under conjugation")
    content = target_content if target_content is not None else _greedy_content(values)
    if content.weight != len(values):
        raise DecompositionError(f"content {content} does not have {len(values)} boxes")
    chains = _match_content(values, content, tol)
    if chains is None:
        raise DecompositionError(f"no grouping of {values} matches {content} within {10 * tol}")
    groups = sorted(
        (_make_group([values[j] for j in chain]) for chain in chains), key=lambda g: (-g.length, g.center)
    )
    return StringDecomposition(
        groups=tuple(groups),
        content=content,
        non_self_conjugate=any(not g.self_conjugate for g in groups),
    )


@lru_cache(maxsize=8192)
def infer_content(sol: BetheSolution) -> Partition:
    """Content of the greedy ladders, or the minimum-deviation content when those do not fit"""
    try:
        return decompose(sol).content
    except DecompositionError:
        pass
    best, best_total = None, None
    for content in partitions(sol.ell):
        try:
            total = decompose(sol, content).total_deviation
        except DecompositionError:
            continue
        if best_total is None or total < best_total - 1e-12:
            best, best_total = content, total
    if best is None:
        raise DecompositionError(f"no string content fits {sol.roots}")
    return best


def matches_content(sol: BetheSolution, content: Partition) -> bool:
    try:
        return infer_content(sol) == content
    except DecompositionError:
        return False


def format_group(group: StringGroup) -> str:
    return f"{group.length}-string: " + ", ".join(f"{z.real:.8f}{z.imag:+.8f}i" for z in group.members)


# Ordering
def _group_key(group: StringGroup, use_center: bool) -> float:
    members = group.members
    m = group.length
    if m == 1:
        return members[0].real
    if use_center and m % 2 == 1:
        return members[m // 2].real
    paired = [z for k, z in enumerate(members) if not (m % 2 == 1 and k == m // 2)]
    return sum(z.real for z in paired) / len(paired)


def longest_string_key(dec: StringDecomposition, use_center: bool = False) -> float:
    """Mean real part of the conjugate-pair members of the longest string"""
    if not dec.groups:
        raise DecompositionError("empty decomposition has no ordering key")
    longest = max(g.length for g in dec.groups)
    return max(_group_key(g, use_center) for g in dec.groups if g.length == longest)


def ordering_key(dec: StringDecomposition, use_center: bool = False) -> tuple:
    """Longest-string key descending, then the other strings ascending, then the roots"""
    primary = longest_string_key(dec, use_center)
    longest = max(g.length for g in dec.groups)
    groups = sorted(dec.groups, key=lambda g: (-g.length, -_group_key(g, use_center)))
    leader = next(g for g in groups if g.length == longest)
    rest = sorted((g for g in groups if g is not leader), key=lambda g: (-g.length, _group_key(g, use_center)))
    roots = tuple((z.real, z.imag) for g in dec.groups for z in g.members)
    return (-round(primary, 12), tuple(round(_group_key(g, use_center), 12) for g in rest), roots)


def order_indices(
    census: SectorCensus, indices: Sequence[int], content: Partition, use_center_key: bool = False
) -> List[int]:
    keys = {i: ordering_key(decompose(census.solutions[i], content), use_center_key) for i in indices}
    return sorted(indices, key=lambda i: keys[i])


# Layout of the free rows
@dataclasses.dataclass(frozen=True)
class _Layout:
    scheme: str
    outer_row: Optional[int] = None
    inner_row: Optional[int] = None
    equal_pair: bool = False


def _layout(shape: SectorShape, content: Partition) -> _Layout:
    free = [k for k in content.distinct_rows() if vacancy_number(shape, content, k) > 0]
    mult = {k: content.multiplicity(k) for k in free}
    if not free:
        return _Layout("forced")
    if len(free) == 1 and mult[free[0]] == 1:
        return _Layout("single", outer_row=free[0])
    if len(free) == 1 and mult[free[0]] == 2:
        return _Layout("block", outer_row=free[0], inner_row=free[0], equal_pair=True)
    if len(free) == 2 and mult[free[0]] == 1 and mult[free[1]] == 1:
        return _Layout("block", outer_row=free[0], inner_row=free[1])
    if len(free) == 2 and sorted(mult.values()) == [1, 2]:
        single = next(k for k in free if mult[k] == 1)
        pair = next(k for k in free if mult[k] == 2)
        return _Layout("peeling", outer_row=single, inner_row=pair, equal_pair=True)
    return _Layout("heuristic")


def _objects(dec: StringDecomposition, layout: _Layout) -> Tuple[float, float]:
    """Centers of the outer and inner free strings"""
    if layout.equal_pair and layout.scheme == "block":
        pair = sorted(g.center for g in dec.groups if g.length == layout.outer_row)
        return pair[1], pair[0]
    outer = next(g.center for g in dec.groups if g.length == layout.outer_row)
    inner = next(g.center for g in dec.groups if g.length == layout.inner_row)
    return outer, inner


def _rigging_blocks(shape: SectorShape, content: Partition, layout: _Layout) -> Dict[int, List[int]]:
    """Outer rigging -> sorted inner riggings over the rigged configurations of content"""
    rows = list(content.parts)
    blocks: Dict[int, List[int]] = {}
    for rc in enumerate_rigged_configs(shape, content.weight, content):
        if layout.scheme == "peeling":
            outer = rc.riggings[rows.index(layout.outer_row)]
            inner = max(r for p, r in rc.rows() if p == layout.inner_row)
        elif layout.equal_pair:
            pair = sorted((r for p, r in rc.rows() if p == layout.outer_row), reverse=True)
            outer, inner = pair[0], pair[1]
        else:
            outer = rc.riggings[rows.index(layout.outer_row)]
            inner = rc.riggings[rows.index(layout.inner_row)]
        blocks.setdefault(outer, []).append(inner)
    return {r: sorted(v) for r, v in blocks.items()}


def _build_rc(content: Partition, layout: _Layout, outer: int, inner: int) -> RiggedConfiguration:
    riggings = [0] * content.length
    parts = list(content.parts)
    if layout.equal_pair:
        first = parts.index(layout.outer_row)
        riggings[first], riggings[first + 1] = outer, inner
    else:
        riggings[parts.index(layout.outer_row)] = outer
        if layout.inner_row is not None:
            riggings[parts.index(layout.inner_row)] = inner
    return RiggedConfiguration.canonical(content, riggings)


# Block layout search
def block_layout(
    keys: Sequence[float],
    inner: Sequence[float],
    sizes: Sequence[int],
    must_keep: frozenset = frozenset(),
    must_remove: frozenset = frozenset(),
):
    """Split an ordered list into consecutive blocks of the given sizes.

    Exactly len(keys) - sum(sizes) elements are dropped. Inner keys strictly
    increase within a block and the cost is the sum of squared ordering-key
    gaps inside blocks. Returns (cost, blocks, removed) or None.
    """
    n = len(keys)
    total = sum(sizes)
    drop = n - total
    if drop < 0 or len(must_remove) > drop:
        return None
    ends = set()
    running = 0
    for size in sizes:
        running += size
        ends.add(running)

    # state (removed, last kept index in the open block or -1) -> (cost, parent state, kept)
    layers = [{(0, -1): (0.0, None, None)}]
    for i in range(n):
        nxt: Dict[tuple, tuple] = {}
        for (removed, last), (cost, _, _) in layers[-1].items():
            kept_before = i - removed
            if i not in must_keep and removed < drop:
                state = (removed + 1, last)
                if state not in nxt or cost < nxt[state][0]:
                    nxt[state] = (cost, (removed, last), False)
            if i in must_remove or kept_before >= total:
                continue
            if last >= 0 and not inner[i] > inner[last]:
                continue
            step = (keys[last] - keys[i]) ** 2 if last >= 0 else 0.0
            state = (removed, -1 if kept_before + 1 in ends else i)
            if state not in nxt or cost + step < nxt[state][0]:
                nxt[state] = (cost + step, (removed, last), True)
        layers.append(nxt)

    final = (drop, -1)
    if final not in layers[-1]:
        return None
    cost = layers[-1][final][0]
    kept, removed = [], []
    state = final
    for i in range(n, 0, -1):
        _, parent, was_kept = layers[i][state]
        (kept if was_kept else removed).append(i - 1)
        state = parent
    kept.reverse()
    removed.reverse()
    blocks, start = [], 0
    for size in sizes:
        blocks.append(kept[start:start + size])
        start += size
    return cost, blocks, removed


def _forced_removals(keys, inner, sizes, layout_result) -> List[int]:
    """Members of the optimal removal set that cannot be kept without a worse layout"""
    cost, _, removed = layout_result
    forced = []
    for index in removed:
        alternative = block_layout(keys, inner, sizes, must_keep=frozenset([index]))
        if alternative is None or alternative[0] > cost * (1 + 1e-9) + 1e-12:
            forced.append(index)
    return forced


def _size_orders(blocks: Dict[int, List[int]]) -> List[List[int]]:
    return [sorted(blocks, reverse=True), sorted(blocks)]


def _ranked(result, outer_keys: Sequence[float], blocks: Dict[int, List[int]]) -> Optional[Dict[int, int]]:
    """Outer rigging per block: blocks ranked by mean outer key; None if sizes disagree"""
    _, layout_blocks, _ = result
    means = [sum(outer_keys[i] for i in block) / len(block) for block in layout_blocks]
    order = sorted(range(len(layout_blocks)), key=lambda b: means[b])
    riggings = sorted(blocks)
    out = {}
    for rank, b in enumerate(order):
        if len(layout_blocks[b]) != len(blocks[riggings[rank]]):
            return None
        out[b] = riggings[rank]
    return out


def _solve_blocks(outer_keys, inner_keys, keys, blocks, must_remove=frozenset()):
    best = None
    for rigging_order in _size_orders(blocks):
        sizes = [len(blocks[r]) for r in rigging_order]
        result = block_layout(keys, inner_keys, sizes, must_remove=must_remove)
        if result is None:
            continue
        ranks = _ranked(result, outer_keys, blocks)
        if ranks is None:
            continue
        if best is None or result[0] < best[0][0]:
            best = (result, ranks, sizes)
    return best


def _block_inputs(decs: Sequence[StringDecomposition], layout: _Layout, use_center: bool):
    keys = [longest_string_key(d, use_center) for d in decs]
    objects = [_objects(d, layout) for d in decs]
    return keys, [o[0] for o in objects], [o[1] for o in objects]


def _pass_exceptional(decs, layout, blocks, use_center) -> List[int]:
    keys, outer_keys, inner_keys = _block_inputs(decs, layout, use_center)
    found = _solve_blocks(outer_keys, inner_keys, keys, blocks)
    if found is None:
        return []
    result, _, sizes = found
    return _forced_removals(keys, inner_keys, sizes, result)


def detect_exceptional(
    ordered_solutions: Sequence[BetheSolution], content: Partition, use_center: bool = False
) -> List[int]:
    """Positions whose removal restores the block-monotone layout.

    Runs on the given order and again on the root-negated solutions in their
    own order; the union of both passes is returned.
    """
    if not ordered_solutions:
        return []
    shape = SectorShape.spin_half(ordered_solutions[0].n_sites)
    layout = _layout(shape, content)
    blocks = _rigging_blocks(shape, content, layout) if layout.scheme in ("block", "peeling") else {}
    surplus = len(ordered_solutions) - sum(len(v) for v in blocks.values())
    if layout.scheme == "peeling":
        decs = [decompose(s, content) for s in ordered_solutions]
        _, exceptional = _peel(decs, layout, blocks, use_center)
        return sorted(exceptional)
    if layout.scheme != "block" or surplus <= 0:
        return []

    decs = [decompose(s, content) for s in ordered_solutions]
    first = _pass_exceptional(decs, layout, blocks, use_center)

    mirrored = [decompose(s.negated(), content) for s in ordered_solutions]
    order = sorted(range(len(mirrored)), key=lambda i: ordering_key(mirrored[i], use_center))
    second = [order[i] for i in _pass_exceptional([mirrored[i] for i in order], layout, blocks, use_center)]

    found = sorted(set(first) | set(second))
    if len(found) != surplus:
        logger.warning("found %d exceptional solutions for a surplus of %d", len(found), surplus)
    return found


# Peeling for a free pair of equal rows plus one more free row
def _peel(decs, layout: _Layout, blocks: Dict[int, List[int]], use_center: bool):
    """Blocks of the outer rigging descending; chains with the pair spreading apart"""
    pair_value = max(max(v) for v in blocks.values()) if blocks else 0
    pairs = []
    for d in decs:
        centers = sorted(g.center for g in d.groups if g.length == layout.inner_row)
        pairs.append((centers[0], centers[1]))
    exceptional: set = set()
    outer_values = sorted(blocks, reverse=True)
    block_size = {r: len(blocks[r]) for r in outer_values}

    for _ in range(len(decs) + 1):
        mapping: Dict[int, Tuple[int, int, int]] = {}
        remaining = [i for i in range(len(decs)) if i not in exceptional]
        failed = None
        cursor = 0
        for outer in outer_values:
            block = remaining[cursor:cursor + block_size[outer]]
            cursor += block_size[outer]
            pool = list(block)
            for c in range(pair_value + 1):
                chain = [pool[0]] if pool else []
                for j in pool[1:]:
                    if len(chain) == pair_value - c + 1:
                        break
                    small, large = pairs[chain[-1]]
                    if pairs[j][0] < small and pairs[j][1] > large:
                        chain.append(j)
                if len(chain) != pair_value - c + 1:
                    failed = chain[0] if chain else None
                    break
                for t, j in enumerate(chain):
                    mapping[j] = (outer, c + t, c)
                    pool.remove(j)
            if failed is not None or (block and len(block) < block_size[outer]):
                break
        if failed is None:
            leftover = [i for i in remaining if i not in mapping]
            return mapping, exceptional | set(leftover)
        exceptional.add(failed)
    raise AssignmentError("peeling did not settle")


# Assignment
def _content_indices(census: SectorCensus, content: Partition) -> List[int]:
    return [
        i for i, s in enumerate(census.solutions)
        if s.classification.is_physical and matches_content(s, content)
    ]


def assign_riggings(census: SectorCensus, content: Partition, use_center_key: bool = False) -> RiggingAssignment:
    """Rigged configuration of every physical solution of one content"""
    shape = SectorShape.spin_half(census.n_sites)
    layout = _layout(shape, content)
    indices = order_indices(census, _content_indices(census, content), content, use_center_key)
    rcs = enumerate_rigged_configs(shape, census.ell, content)
    if not indices:
        return RiggingAssignment(scheme=layout.scheme)
    if len(indices) > len(rcs) and layout.scheme in ("forced", "single", "heuristic"):
        raise CountMismatchError(f"{len(indices)} solutions for {len(rcs)} rigged configurations of {content}")
    heuristic = tuple(content.parts) not in DEMONSTRATED and layout.scheme in ("block", "peeling")

    if layout.scheme == "forced":
        if len(indices) != 1:
            raise AssignmentError(f"content {content} has no free rows but {len(indices)} solutions")
        return RiggingAssignment({indices[0]: rcs[0]}, scheme="forced")

    decs = [decompose(census.solutions[i], content) for i in indices]
    if layout.scheme == "single":
        if len(indices) != len(rcs):
            raise CountMismatchError(f"{len(indices)} solutions for {len(rcs)} rigged configurations of {content}")
        centers = [next(g.center for g in d.groups if g.length == layout.outer_row) for d in decs]
        ranking = sorted(range(len(indices)), key=lambda k: centers[k])
        mapping = {indices[k]: _build_rc(content, layout, rank, 0) for rank, k in enumerate(ranking)}
        return RiggingAssignment(mapping, scheme="single")

    if layout.scheme == "heuristic":
        logger.warning("content %s has no monotone scheme, assigning lexicographically", content)
        mapping = {i: rc for i, rc in zip(indices, rcs)}
        return RiggingAssignment(mapping, scheme="heuristic", heuristic=True)

    blocks = _rigging_blocks(shape, content, layout)
    if layout.scheme == "peeling":
        peeled, exceptional = _peel(decs, layout, blocks, use_center_key)
        mapping = {indices[k]: _build_peeled(content, layout, *v) for k, v in peeled.items()}
        if len(mapping) != len(rcs):
            raise AssignmentError(f"peeling placed {len(mapping)} of {len(rcs)} rigged configurations of {content}")
        return RiggingAssignment(mapping, tuple(sorted(indices[k] for k in exceptional)), "peeling", heuristic)

    ordered = [census.solutions[i] for i in indices]
    exceptional = detect_exceptional(ordered, content, use_center_key)
    surplus = len(indices) - len(rcs)
    keys, outer_keys, inner_keys = _block_inputs(decs, layout, use_center_key)
    must_remove = frozenset(exceptional) if len(exceptional) == surplus else frozenset()
    found = _solve_blocks(outer_keys, inner_keys, keys, blocks, must_remove)
    if found is None:
        raise AssignmentError(f"no block-monotone layout of {len(indices)} solutions onto {content}")
    (_, layout_blocks, removed), ranks, _ = found
    mapping = {}
    for b, block in enumerate(layout_blocks):
        outer = ranks[b]
        for position, k in enumerate(block):
            mapping[indices[k]] = _build_rc(content, layout, outer, blocks[outer][position])
    return RiggingAssignment(mapping, tuple(sorted(indices[k] for k in removed)), "block", heuristic)


def _build_peeled(content: Partition, layout: _Layout, outer: int, first: int, second: int) -> RiggedConfiguration:
    riggings = [0] * content.length
    parts = list(content.parts)
    riggings[parts.index(layout.outer_row)] = outer
    start = parts.index(layout.inner_row)
    riggings[start], riggings[start + 1] = first, second
    return RiggedConfiguration.canonical(content, riggings)


def assign_exceptional_with_complex(census: SectorCensus) -> RiggingAssignment:
    """Exceptional real solutions join the 2-string family, ordered by mean real part"""
    content = Partition((2,))
    shape = SectorShape.spin_half(census.n_sites)
    vacancy = vacancy_number(shape, content, 2)
    family = [
        i for i, s in enumerate(census.solutions)
        if s.classification.is_physical and i not in census.exceptional and matches_content(s, content)
    ]
    family += list(census.exceptional)
    if len(family) != vacancy + 1:
        raise CountMismatchError(f"{len(family)} solutions for the {vacancy + 1} riggings of {content}")
    family.sort(key=lambda i: sum(z.real for z in census.solutions[i].roots) / census.ell)
    mapping = {i: RiggedConfiguration(content, (r,)) for r, i in enumerate(family)}
    return RiggingAssignment(mapping, scheme="exceptional-merge")


def classify_census(census: SectorCensus, use_center_key: bool = False) -> SectorCensus:
    """Assign riggings content by content; exceptional reals are merged into (2) when ell = 2"""
    contents = sorted(
        {infer_content(s) for s in census.solutions if s.classification.is_physical}, key=lambda nu: nu.parts
    )
    mapping: Dict[int, RiggedConfiguration] = {}
    exceptional: List[int] = []
    heuristic: List[str] = []
    for content in contents:
        if census.ell == 2 and content.parts == (2,) and exceptional:
            continue
        assignment = assign_riggings(census, content, use_center_key)
        mapping.update(assignment.mapping)
        exceptional.extend(assignment.exceptional)
        if assignment.heuristic:
            heuristic.append(str(content))

    result = dataclasses.replace(
        census, assignment=mapping, exceptional=tuple(sorted(exceptional)), heuristic_contents=tuple(heuristic)
    )
    if census.ell == 2 and exceptional:
        merged = assign_exceptional_with_complex(result)
        mapping = {**mapping, **merged.mapping}
        result = dataclasses.replace(result, assignment=mapping)
    return result


def key_convention_agrees(census: SectorCensus) -> bool:
    """Whether ordering by the pair members or by the middle member gives one assignment"""
    return classify_census(census, False).assignment == classify_census(census, True).assignment
