from math import comb

import pytest

from bethe_rc.models import Partition, RiggedConfiguration, SectorShape
from bethe_rc.rigged import (
    admissible_contents,
    count_for_content,
    count_rigged_configs,
    enumerate_rigged_configs,
    flip,
    from_record,
    is_valid,
    partitions,
    render_diagram,
    row_vacancies,
    to_record,
    vacancy_number,
)


# Partitions
def test_partitions_of_four():
    """Partitions come out with rows weakly decreasing, largest first"""
    found = [p.parts for p in partitions(4)]
    assert found == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_partition_parse_sorts_rows():
    assert Partition.parse("1,3,2") == Partition((3, 2, 1))


def test_partition_rejects_increasing_rows():
    with pytest.raises(ValueError):
        Partition((1, 2))


# Vacancy numbers
def test_vacancy_numbers_of_n12():
    """N=12 with content (3,2,1) leaves 6, 2 and 0 vacancies"""
    shape = SectorShape.spin_half(12)
    nu = Partition((3, 2, 1))
    assert [vacancy_number(shape, nu, k) for k in (1, 2, 3)] == [6, 2, 0]
    assert row_vacancies(shape, nu) == [0, 2, 6]


def test_admissible_contents_are_lexicographic():
    shape = SectorShape.spin_half(4)
    assert [nu.parts for nu in admissible_contents(shape, 2)] == [(1, 1), (2,)]


# Counting
@pytest.mark.parametrize("n", range(2, 15))
def test_counts_match_highest_weight_dimension(n):
    """Rigged configurations count the highest-weight states of every sector"""
    shape = SectorShape.spin_half(n)
    for ell in range(1, n // 2 + 1):
        assert count_rigged_configs(shape, ell) == comb(n, ell) - comb(n, ell - 1)
        assert len(enumerate_rigged_configs(shape, ell)) == comb(n, ell) - comb(n, ell - 1)


def test_known_content_counts():
    assert count_for_content(SectorShape.spin_half(12), Partition((3, 2, 1))) == 21
    assert count_for_content(SectorShape.spin_half(12), Partition((3, 1, 1))) == 84
    assert count_rigged_configs(SectorShape.spin_half(25), 2) == 275
    assert count_rigged_configs(SectorShape.spin_half(2), 1) == 1


def test_content_filter_with_wrong_weight_is_empty():
    shape = SectorShape.spin_half(12)
    assert enumerate_rigged_configs(shape, 6, Partition((3, 2))) == []


def test_enumerate_rejects_empty_sector():
    with pytest.raises(ValueError):
        enumerate_rigged_configs(SectorShape.spin_half(4), 0)


def test_enumeration_is_sorted_and_valid():
    shape = SectorShape.spin_half(10)
    configs = enumerate_rigged_configs(shape, 4)
    assert configs == sorted(configs, key=lambda rc: (rc.nu.parts, rc.riggings))
    assert len(set(configs)) == len(configs)
    assert all(is_valid(rc, shape) for rc in configs)


# Rigged configurations
def test_equal_rows_need_decreasing_riggings():
    with pytest.raises(ValueError):
        RiggedConfiguration(Partition((1, 1)), (0, 3))
    assert RiggedConfiguration.canonical(Partition((1, 1)), (0, 3)).riggings == (3, 0)


def test_rigging_above_vacancy_is_invalid():
    shape = SectorShape.spin_half(12)
    assert not is_valid(RiggedConfiguration(Partition((3, 2, 1)), (1, 0, 0)), shape)


def test_flip_is_an_involution():
    shape = SectorShape.spin_half(12)
    for rc in enumerate_rigged_configs(shape, 6):
        flipped = flip(rc, shape)
        assert is_valid(flipped, shape)
        assert flip(flipped, shape) == rc


def test_flip_complements_riggings():
    shape = SectorShape.spin_half(12)
    rc = RiggedConfiguration(Partition((3, 2, 1)), (0, 0, 5))
    assert flip(rc, shape).riggings == (0, 2, 1)


def test_record_keeps_vacancies():
    shape = SectorShape.spin_half(12)
    rc = RiggedConfiguration(Partition((3, 2, 1)), (0, 1, 3))
    record = to_record(rc, shape)
    assert record.vacancy == [0, 2, 6]
    assert from_record(record) == rc


def test_render_diagram():
    """Vacancy numbers on the left, riggings on the right"""
    shape = SectorShape.spin_half(14)
    rc = RiggedConfiguration(Partition((3, 2, 1, 1)), (0, 1, 4, 2))
    lines = render_diagram(rc, shape).splitlines()
    assert [int(line.split()[0]) for line in lines] == [0, 2, 6, 6]
    assert [int(line.split()[-1]) for line in lines] == [0, 1, 4, 2]
    assert lines[0].split()[1] == "□□□"
