import math
from datetime import datetime, timezone

import numpy as np
import pytest
from pydantic import ValidationError

from bethe_rc.bethe import energy, nw_criterion, offshell_coefficient, singular_energy_logderivative
from bethe_rc.commands.classify import census_to_assignment
from bethe_rc.commands.quintic import QUINTIC, completed_solutions
from bethe_rc.errors import DegenerateDegreeError
from bethe_rc.models import BetheSolution, Classification, Partition
from bethe_rc.schemas import SolverConfig
from bethe_rc.solver import (
    NewtonFailure,
    accept_candidate,
    build_census,
    census_report,
    merge_solutions,
    newton_refine,
    phase_grid,
    polish_extended,
    polynomial_roots,
    real_grid,
    render_report,
    seed_set,
    solve_sector,
    string_seeds,
)
from bethe_rc.storage import census_to_document, load_census, make_manifest, save_census
from bethe_rc.strings import classify_census, infer_content
from tests.tables import N12_ROWS


@pytest.fixture(name="light")
def light_fixture():
    """A small seed set for sectors with a handful of solutions"""
    return SolverConfig(seed_grid=(-3.0, 3.0, 0.1), random_restarts=16, escalate=False)


# Seeds
def test_real_grid_includes_both_ends():
    grid = real_grid(SolverConfig(seed_grid=(-1.0, 1.0, 0.5)))
    assert list(grid) == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_phase_grid_is_symmetric():
    grid = np.sort(phase_grid(6, 1, 2))
    assert np.allclose(grid, -grid[::-1])
    assert 0.0 in grid


def test_string_seeds_are_ladders():
    seeds = string_seeds(Partition((2,)), 6, SolverConfig(string_seed_deviations=(0.0,)))
    for seed in seeds:
        assert seed[0].real == seed[1].real
        assert abs(seed[0].imag - seed[1].imag) == pytest.approx(1.0)


def test_string_seeds_include_fused_middles():
    seeds = string_seeds(Partition((3, 2, 1)), 12, SolverConfig())
    fused = [s for s in seeds if any(abs(z.imag - 0.02) < 1e-12 for z in s)]
    assert fused
    assert all(any(abs(z.imag + 0.02) < 1e-12 for z in s) for s in fused)


def test_seed_set_contains_the_singular_core(light):
    seeds = seed_set(4, 2, light)
    assert seeds.shape[1] == 2
    assert any(set(row) == {0.5j, -0.5j} for row in seeds)


def test_seed_cap_keeps_structured_seeds(light):
    capped = light.model_copy(update={"max_seeds": 100})
    seeds = seed_set(4, 2, capped)
    assert len(seeds) == 100
    assert any(set(row) == {0.5j, -0.5j} for row in seeds)


def test_seed_set_rejects_overfull_sector():
    with pytest.raises(ValueError):
        seed_set(4, 3)


# Newton
def test_newton_refine_single_magnon():
    sol = newton_refine([0.45], 4)
    assert isinstance(sol, BetheSolution)
    assert sol.roots[0] == pytest.approx(0.5, abs=1e-12)


def test_newton_refine_keeps_pinned_core():
    sol = newton_refine([0.5j, -0.5j], 4)
    assert isinstance(sol, BetheSolution)
    assert sol.classification == Classification.PHYSICAL_SINGULAR


def test_newton_refine_rejects_coinciding_roots():
    outcome = newton_refine([0.3, 0.3], 6)
    assert isinstance(outcome, NewtonFailure)


def test_newton_refine_finds_odd_chain_real_pair():
    sol = newton_refine([-3.04, -2.30], 25)
    assert isinstance(sol, BetheSolution)
    assert sol.distance(BetheSolution(25, (-3.04, -2.30))) < 0.01
    assert sol.residual_norm < 1e-12


def test_newton_refine_in_extended_precision():
    cfg = SolverConfig(precision_mode="extended")
    sol = newton_refine([0.3, -0.3], 4, cfg)
    assert sol.precise is not None
    assert sol.roots[0] == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-14)


def test_polish_without_free_roots():
    roots, norm = polish_extended([], [0.5j, -0.5j], 4, SolverConfig())
    assert len(roots) == 2
    assert norm == 0


def test_newton_refine_rejects_empty_seed():
    with pytest.raises(ValueError):
        newton_refine([], 4)


def test_candidate_must_close_under_conjugation():
    """Roots a distance i apart solve the cleared system without being a solution"""
    outcome = accept_candidate([0.18125 + 0.50585j, 0.18125 - 0.49415j], 25, SolverConfig())
    assert isinstance(outcome, NewtonFailure)
    assert outcome.reason == "not_self_conjugate"


def test_exact_string_needs_quantized_center():
    outcome = accept_candidate([0.18125 + 0.5j, 0.18125 - 0.5j], 25, SolverConfig())
    assert isinstance(outcome, NewtonFailure)
    assert outcome.reason == "momentum"

    center = 1 / math.tan(12 * math.pi / 25)
    sol = accept_candidate([center + 0.5j, center - 0.5j], 25, SolverConfig())
    assert isinstance(sol, BetheSolution)
    assert sol.classification == Classification.REGULAR


def test_quintic_solutions_are_on_shell():
    """Every off-shell coefficient vanishes at the refined physical singular solutions"""
    cfg = SolverConfig(precision_mode="extended")
    for seed in completed_solutions():
        rest = [z for z in seed.roots if abs(abs(z.imag) - 0.5) > 1e-9 or abs(z.real) > 1e-9]
        sol = newton_refine([0.5j, -0.5j, *rest], 12, cfg)
        assert isinstance(sol, BetheSolution)
        assert sol.classification == Classification.PHYSICAL_SINGULAR
        for k in range(1, 6):
            assert abs(offshell_coefficient(k, 0.7 + 0.2j, sol, dps=cfg.extended_dps)) < 1e-8


# Merging
def test_merge_keeps_lowest_residual():
    a = BetheSolution(6, (0.3, -0.1), residual_norm=1e-13)
    b = BetheSolution(6, (0.3 + 1e-10, -0.1), residual_norm=1e-14)
    c = BetheSolution(6, (0.2, -0.1), residual_norm=1e-13)
    merged = merge_solutions([a, b, c], 1e-8)
    assert len(merged) == 2
    assert merged[0].residual_norm == 1e-14


# Sectors
def test_four_site_sector(light):
    census = solve_sector(4, 2, light)
    assert census.rc_count == 2
    assert census.counts["physical"] == 2
    assert census.counts["singular"] == 1
    energies = sorted(energy(s) for s in census.solutions if s.classification.is_physical)
    assert energies == pytest.approx([-3.0, -1.0])


def test_six_site_two_magnons(light):
    census = solve_sector(6, 2, light)
    assert census.counts["physical"] == census.rc_count == 9


def test_content_filter(light):
    census = solve_sector(6, 2, light, Partition((1, 1)))
    assert census.content_filter == Partition((1, 1))
    assert census.solutions
    assert all(infer_content(s) == Partition((1, 1)) for s in census.solutions)


def test_solve_is_reproducible(light):
    first = solve_sector(6, 2, light.model_copy(update={"rng_seed": 11}))
    second = solve_sector(6, 2, light.model_copy(update={"rng_seed": 11}))
    assert first.solutions == second.solutions


def test_solve_does_not_depend_on_threads(light):
    serial = solve_sector(6, 2, light)
    parallel = solve_sector(6, 2, light.model_copy(update={"threads": 2}))
    assert [s.roots for s in serial.solutions] == [s.roots for s in parallel.solutions]
    assert [s.classification for s in serial.solutions] == [s.classification for s in parallel.solutions]


def test_solve_rejects_overfull_sector():
    with pytest.raises(ValueError):
        solve_sector(4, 3)


# Polynomials
def test_quintic_roots():
    roots = polynomial_roots(QUINTIC)
    assert len(roots) == 5
    assert all(z.imag == 0 for z in roots)
    positive = [z.real for z in roots if z.real > 0]
    assert len(positive) == 3
    assert math.sqrt(min(positive)) == pytest.approx(0.178978221719006, abs=1e-12)


def test_polynomial_roots_of_quadratic():
    assert polynomial_roots([1.0, 0.0, -1.0]) == [-1.0, 1.0]


@pytest.mark.parametrize("coeffs", [[0.0, 1.0], [3.0]])
def test_degenerate_polynomials(coeffs):
    with pytest.raises(DegenerateDegreeError):
        polynomial_roots(coeffs)


def test_quintic_gives_physical_singular_solutions():
    for sol in completed_solutions():
        assert sol.residual_norm < 1e-10
        assert sol.classification == Classification.PHYSICAL_SINGULAR
        assert nw_criterion(sol)


def test_quintic_energy_from_transfer_matrix():
    sol = completed_solutions()[-1]
    assert singular_energy_logderivative(sol) == pytest.approx(energy(sol), abs=1e-6)


# Reports
def test_report_numbers_table(n12_census):
    report = census_report(n12_census)
    (block,) = report["contents"]
    assert block["content"] == [3, 2, 1]
    assert [row["index"] for row in block["solutions"]] == list(range(21))
    assert [row["number"] for row in block["solutions"] if row["star"]] == [6, 11, 16]


def test_report_shows_rigged_configurations(n12_census):
    text = render_report(census_report(classify_census(n12_census)))
    assert "#6*" in text
    assert "{(3,0),(2,1),(1,3)}" in text


def test_report_of_empty_census():
    report = census_report(build_census(4, 2, []))
    assert report["contents"] == []
    assert report["completeness"] == "0/2"


# Full sectors
@pytest.mark.slow
def test_twelve_sites_three_two_one():
    cfg = SolverConfig(precision_mode="extended")
    census = solve_sector(12, 6, cfg, Partition((3, 2, 1)))
    assert census.counts["physical"] == 21
    for middle, upper, two, one in N12_ROWS:
        expected = BetheSolution(12, (middle, upper, upper.conjugate(), two, two.conjugate(), one))
        assert min(s.distance(expected) for s in census.solutions) < 1e-7


@pytest.mark.slow
def test_twenty_five_sites_two_magnons():
    census = solve_sector(25, 2, SolverConfig(precision_mode="extended"))
    counts = census.counts
    assert counts["real"] == 255
    assert counts["complex"] == 21
    assert counts["singular"] == 1
    assert counts["physical"] == census.rc_count == 275
    classified = classify_census(census)
    assert len(classified.exceptional) == 2
    assert len(set(classified.assignment.values())) == 275
    assert census_to_assignment(classified).exceptional == [23, 255]
    rigging = {}
    for i in classified.exceptional:
        mean = sum(z.real for z in classified.solutions[i].roots) / 2
        rigging[round(mean, 1)] = classified.assignment[i].riggings[0]
    assert rigging == {-2.7: 1, 2.7: 20}


@pytest.mark.slow
def test_twelve_sites_five_magnons_contains_quintic():
    census = solve_sector(12, 5, SolverConfig(precision_mode="extended"))
    assert census.counts["physical"] == census.rc_count
    for sol in completed_solutions():
        assert min(s.distance(sol) for s in census.solutions) < 1e-8


# Configuration
def test_config_rejects_loose_dedup():
    with pytest.raises(ValidationError):
        SolverConfig(newton_tol=1e-8, dedup_tol=1e-9)


def test_config_rejects_empty_grid():
    with pytest.raises(ValidationError):
        SolverConfig(seed_grid=(1.0, -1.0, 0.1))


def test_denser_config_escalates_precision():
    denser = SolverConfig().denser()
    assert denser.extended
    assert not denser.escalate
    assert denser.seed_grid[2] == pytest.approx(0.0125)


def test_extended_roots_survive_storage(tmp_path):
    sol = newton_refine([0.3, -0.3], 4, SolverConfig(precision_mode="extended"))
    census = build_census(4, 2, [sol])
    document = save_census(
        census_to_document(census, SolverConfig()), tmp_path / "census.json", make_manifest(None, datetime.now(timezone.utc))
    )
    loaded, _ = load_census(tmp_path / "census.json")
    assert document.manifest.content_sha256
    assert loaded.solutions[0].precise is not None
    assert abs(loaded.solutions[0].precise[0] - sol.precise[0]) < 1e-30
