"""Partitions, vacancy numbers and rigged configurations of a sector."""

import itertools
import logging
from functools import lru_cache
from math import comb
from typing import Dict, Iterator, List, Optional

from bethe_rc.models import Partition, RiggedConfiguration, SectorShape
from bethe_rc.schemas import RiggedConfigRecord

logger = logging.getLogger(__name__)


def partitions(weight: int, max_part: Optional[int] = None) -> Iterator[Partition]:
    """All partitions of weight, rows weakly decreasing"""
    for parts in _partition_tuples(weight, weight if max_part is None else max_part):
        yield Partition(parts)


@lru_cache(maxsize=None)
def _partition_tuples(weight: int, max_part: int) -> tuple:
    if weight == 0:
        return ((),)
    out = []
    for first in range(min(weight, max_part), 0, -1):
        for rest in _partition_tuples(weight - first, first):
            out.append((first,) + rest)
    return tuple(out)


def vacancy_number(shape: SectorShape, nu: Partition, k: int) -> int:
    """P_k(nu) = sum_j min(k, mu_j) - 2 sum_j min(k, nu_j)"""
    if k < 0:
        raise ValueError("vacancy numbers are defined for k >= 0")
    return sum(min(k, m) for m in shape.mu) - 2 * nu.columns(k)


def row_vacancies(shape: SectorShape, nu: Partition) -> List[int]:
    """Vacancy number of every row, index-aligned with nu.parts"""
    return [vacancy_number(shape, nu, p) for p in nu.parts]


def is_admissible(shape: SectorShape, nu: Partition) -> bool:
    admissible = all(vacancy_number(shape, nu, k) >= 0 for k in nu.distinct_rows())
    if shape.is_spin_half:
        assert admissible == (2 * nu.weight <= shape.n_sites), "admissibility disagrees with |nu| <= N/2"
    return admissible


def admissible_contents(shape: SectorShape, ell: int) -> List[Partition]:
    """Admissible partitions of ell in lexicographic order"""
    found = [nu for nu in partitions(ell) if is_admissible(shape, nu)]
    return sorted(found, key=lambda nu: nu.parts)


def _rigging_choices(shape: SectorShape, nu: Partition) -> List[tuple]:
    """Per block of equal rows, the weakly decreasing rigging tuples"""
    blocks = []
    for k in nu.distinct_rows():
        vacancy = vacancy_number(shape, nu, k)
        multiplicity = nu.multiplicity(k)
        blocks.append(
            sorted(tuple(sorted(c, reverse=True))
                   for c in itertools.combinations_with_replacement(range(vacancy + 1), multiplicity))
        )
    return blocks


def enumerate_rigged_configs(
    shape: SectorShape, ell: int, content_filter: Optional[Partition] = None
) -> List[RiggedConfiguration]:
    """All canonical rigged configurations with |nu| = ell"""
    if ell < 1:
        raise ValueError("ell must be positive")
    if content_filter is not None:
        if content_filter.weight != ell or not is_admissible(shape, content_filter):
            return []
        contents = [content_filter]
    else:
        contents = admissible_contents(shape, ell)

    configs = []
    for nu in contents:
        for choice in itertools.product(*_rigging_choices(shape, nu)):
            riggings = tuple(itertools.chain.from_iterable(choice))
            configs.append(RiggedConfiguration(nu, riggings))
    configs.sort(key=lambda rc: (rc.nu.parts, rc.riggings))
    return configs


def count_for_content(shape: SectorShape, nu: Partition) -> int:
    if not is_admissible(shape, nu):
        return 0
    total = 1
    for k in nu.distinct_rows():
        m = nu.multiplicity(k)
        total *= comb(vacancy_number(shape, nu, k) + m, m)
    return total


def count_rigged_configs_by_content(shape: SectorShape, ell: int) -> Dict[Partition, int]:
    return {nu: count_for_content(shape, nu) for nu in admissible_contents(shape, ell)}


def count_rigged_configs(shape: SectorShape, ell: int) -> int:
    if ell < 1:
        raise ValueError("ell must be positive")
    total = sum(count_rigged_configs_by_content(shape, ell).values())
    n = shape.n_sites
    if shape.is_spin_half and 2 * ell <= n:
        assert total == comb(n, ell) - comb(n, ell - 1), "rigged configuration count disagrees with binomials"
    return total


def is_valid(rc: RiggedConfiguration, shape: SectorShape) -> bool:
    if not is_admissible(shape, rc.nu):
        return False
    return all(0 <= r <= p for r, p in zip(rc.riggings, row_vacancies(shape, rc.nu)))


def flip(rc: RiggedConfiguration, shape: SectorShape) -> RiggedConfiguration:
    """Complement every rigging, r -> P_{nu_i} - r"""
    vacancies = row_vacancies(shape, rc.nu)
    flipped = RiggedConfiguration.canonical(rc.nu, [p - r for r, p in zip(rc.riggings, vacancies)])
    back = RiggedConfiguration.canonical(rc.nu, [p - r for r, p in zip(flipped.riggings, vacancies)])
    assert back == rc, "flip is not an involution"
    return flipped


def to_record(rc: RiggedConfiguration, shape: SectorShape) -> RiggedConfigRecord:
    return RiggedConfigRecord(
        nu=list(rc.nu.parts), riggings=list(rc.riggings), vacancy=row_vacancies(shape, rc.nu)
    )


def from_record(record: RiggedConfigRecord) -> RiggedConfiguration:
    return RiggedConfiguration.canonical(Partition(tuple(record.nu)), record.riggings)


def render_diagram(rc: RiggedConfiguration, shape: SectorShape, box: str = "□") -> str:
    """Vacancy numbers on the left, rows of boxes, riggings on the right"""
    if rc.nu.length == 0:
        return ""
    vacancies = row_vacancies(shape, rc.nu)
    width = max(len(str(p)) for p in vacancies)
    longest = rc.nu.parts[0]
    lines = []
    for (part, rigging), vacancy in zip(rc.rows(), vacancies):
        lines.append(f"{vacancy:>{width}} {box * part}{' ' * (longest - part)} {rigging}")
    return "\n".join(lines)
