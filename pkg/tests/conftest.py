import json
from pathlib import Path

import pytest

from bethe_rc.models import BetheSolution, Classification, SectorCensus, SectorShape
from bethe_rc.rigged import count_rigged_configs
from tests.tables import N12_ROWS

DATA = Path(__file__).parent / "data"


def _row_solution(row) -> BetheSolution:
    middle, upper, two, one = row
    roots = (middle, upper, upper.conjugate(), two, two.conjugate(), one)
    singular = any(abs(z - 0.5j) < 1e-12 for z in roots) and abs(two.real) < 1e-12
    classification = Classification.PHYSICAL_SINGULAR if singular else Classification.REGULAR
    return BetheSolution(12, roots, 0.0, classification)


@pytest.fixture(name="n12_table")
def n12_table_fixture():
    """The 21 solutions of N=12 with content (3,2,1) in table order"""
    solutions = [_row_solution(row) for row in N12_ROWS]
    solutions += [solutions[k].negated() for k in range(9, -1, -1)]
    return solutions


@pytest.fixture(name="n12_census")
def n12_census_fixture(n12_table):
    shape = SectorShape.spin_half(12)
    return SectorCensus(12, 6, tuple(n12_table), count_rigged_configs(shape, 6))


@pytest.fixture(name="n25_positions")
def n25_positions_fixture():
    """The 255 real N=25, ell=2 solutions at three digits, larger root descending"""
    pairs = json.loads((DATA / "n25_real_positions.json").read_text())["positions"]
    return [BetheSolution(25, (complex(a), complex(b)), 0.0, Classification.REGULAR) for a, b in pairs]
