import math

import numpy as np
import pytest

from bethe_rc.bethe import energy, make_solution, transfer_eigenvalue
from bethe_rc.commands.quintic import completed_solutions
from bethe_rc.errors import NotSingularError, PrecisionError, ResourceError
from bethe_rc.models import BetheSolution, SectorCensus, StateVector
from bethe_rc.oracle import (
    b_string,
    bethe_vector,
    completeness_check,
    eigen_residual,
    four_site_singular_deviation,
    hamiltonian_apply,
    multiset_difference,
    regularized_singular_vector,
    sector_eigenvalues,
    sector_hamiltonian,
    sector_spectrum,
    transfer_apply,
    transfer_block_apply,
    vacuum,
)
from bethe_rc.schemas import SolverConfig
from bethe_rc.solver import solve_sector

PAIR4 = (1 / (2 * math.sqrt(3)), -1 / (2 * math.sqrt(3)))


@pytest.fixture(name="core4")
def core4_fixture():
    return make_solution((0.5j, -0.5j), 4)


@pytest.fixture(name="rng")
def rng_fixture():
    return np.random.default_rng(7)


def random_vector(rng, n: int) -> StateVector:
    return StateVector(n, rng.normal(size=2**n) + 1j * rng.normal(size=2**n))


def random_draws(rng, n: int, count: int = 10):
    """Spectral parameters away from each other and a random state"""
    for _ in range(count):
        lam, mu = rng.uniform(-2, 2, 2) + 1j * rng.uniform(-1, 1, 2)
        if abs(lam - mu) < 0.05:
            mu += 0.5
        yield complex(lam), complex(mu), random_vector(rng, n)


# Hamiltonian
def test_vacuum_has_zero_energy():
    assert np.allclose(hamiltonian_apply(vacuum(5)).amplitudes, 0)


def test_two_site_hamiltonian():
    """H|up down> = J(|down up> - |up down>) on the doubled bond"""
    v = StateVector(2, np.array([0, 1, 0, 0], dtype=complex))
    assert np.allclose(hamiltonian_apply(v).amplitudes, [0, -1, 1, 0])


def test_sparse_sector_matches_dense_action(rng):
    n, ell = 6, 2
    matrix = sector_hamiltonian(n, ell).toarray()
    states = sorted(s for s in range(2**n) if bin(s).count("1") == ell)
    coeffs = rng.normal(size=len(states))
    full = np.zeros(2**n, dtype=complex)
    full[states] = coeffs
    applied = hamiltonian_apply(StateVector(n, full)).amplitudes
    assert np.allclose(applied[states], matrix @ coeffs)


def test_two_site_spectrum():
    record = sector_spectrum(2, 1)
    assert record.eigenvalues == pytest.approx((-2.0, 0.0))
    assert record.highest_weight_energies == pytest.approx((-2.0,))


def test_four_site_highest_weight_energies():
    assert sector_spectrum(4, 2).highest_weight_energies == pytest.approx((-3.0, -1.0))
    assert sector_spectrum(4, 0).highest_weight_energies == pytest.approx((0.0,))


def test_multiset_difference():
    assert multiset_difference([-1.0, -1.0, 0.0, 2.0], [-1.0, 2.0 + 1e-10]) == [-1.0, 0.0]


def test_quintic_energies_are_in_the_spectrum():
    spectrum = sector_eigenvalues(12, 5)
    for sol in completed_solutions():
        assert np.min(np.abs(spectrum - energy(sol))) < 1e-8


def test_oracle_size_limit():
    with pytest.raises(ResourceError):
        sector_hamiltonian(20, 2)
    with pytest.raises(ResourceError):
        bethe_vector((0.1, -0.1), 20)


# Monodromy blocks
def test_blocks_on_vacuum():
    lam, n = 0.3 + 0.2j, 5
    omega = vacuum(n).amplitudes
    a = transfer_block_apply("A", lam, vacuum(n)).amplitudes
    d = transfer_block_apply("D", lam, vacuum(n)).amplitudes
    c = transfer_block_apply("C", lam, vacuum(n)).amplitudes
    assert np.allclose(a, (lam + 0.5j) ** n * omega)
    assert np.allclose(d, (lam - 0.5j) ** n * omega)
    assert np.allclose(c, 0)


def test_single_b_creates_one_down_spin():
    psi = transfer_block_apply("B", 0.4, vacuum(4))
    assert psi.down_spin_counts(tol=1e-12) == {1}


def test_unknown_block():
    with pytest.raises(ValueError):
        transfer_block_apply("E", 0.1, vacuum(2))


def test_b_operators_commute(rng):
    n = 6
    for _ in range(10):
        lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = random_vector(rng, n)
        left = b_string([lam, mu], v).amplitudes
        right = b_string([mu, lam], v).amplitudes
        assert np.linalg.norm(left - right) < 1e-10 * np.linalg.norm(left)


def test_a_b_exchange(rng):
    """A(l)B(m) = (l-m-i)/(l-m) B(m)A(l) + i/(l-m) B(l)A(m)"""
    for lam, mu, v in random_draws(rng, 4):
        left = transfer_block_apply("A", lam, transfer_block_apply("B", mu, v)).amplitudes
        first = transfer_block_apply("B", mu, transfer_block_apply("A", lam, v)).amplitudes
        second = transfer_block_apply("B", lam, transfer_block_apply("A", mu, v)).amplitudes
        right = (lam - mu - 1j) / (lam - mu) * first + 1j / (lam - mu) * second
        assert np.linalg.norm(left - right) < 1e-10 * np.linalg.norm(left)


def test_d_b_exchange(rng):
    """D(l)B(m) = (l-m+i)/(l-m) B(m)D(l) - i/(l-m) B(l)D(m)"""
    for lam, mu, v in random_draws(rng, 4):
        left = transfer_block_apply("D", lam, transfer_block_apply("B", mu, v)).amplitudes
        first = transfer_block_apply("B", mu, transfer_block_apply("D", lam, v)).amplitudes
        second = transfer_block_apply("B", lam, transfer_block_apply("D", mu, v)).amplitudes
        right = (lam - mu + 1j) / (lam - mu) * first - 1j / (lam - mu) * second
        assert np.linalg.norm(left - right) < 1e-10 * np.linalg.norm(left)


# Bethe vectors
def test_two_site_bethe_vector():
    psi = bethe_vector((0.0,), 2)
    assert eigen_residual(psi, -2.0) < 1e-12


def test_on_shell_vector_is_transfer_eigenvector():
    psi = bethe_vector(PAIR4, 4)
    for lam in (0.3 + 0.2j, -1.1):
        value = transfer_eigenvalue(lam, PAIR4, 4)
        assert np.allclose(transfer_apply(lam, psi).amplitudes, value * psi.amplitudes)


def test_bethe_vector_in_extended_precision():
    psi = bethe_vector(PAIR4, 4, dps=40)
    assert psi.is_extended
    assert eigen_residual(psi, -3.0) < 1e-12


def test_singular_bethe_vector_vanishes(core4):
    psi = bethe_vector(core4.roots, 4)
    assert psi.norm() < 1e-12


# Singular vectors
def test_four_site_singular_vector():
    assert four_site_singular_deviation() < 1e-6


def test_regularized_vector_is_eigenvector(core4):
    psi = regularized_singular_vector(core4, 1e-10)
    assert eigen_residual(psi, energy(core4)) < 1e-8


def test_wrong_constant_is_not_an_eigenvector(core4):
    psi = regularized_singular_vector(core4, 1e-10, c=0)
    assert eigen_residual(psi, energy(core4)) > 1e-3


def test_regularized_norm_scales_with_chain_length(core4):
    """The unscaled product of B operators vanishes as eps^N"""
    norms = {eps: float(regularized_singular_vector(core4, eps).norm()) * eps**4 for eps in (1e-2, 1e-4)}
    slope = (math.log10(norms[1e-2]) - math.log10(norms[1e-4])) / 2
    assert slope == pytest.approx(4.0, abs=0.1)


def test_insufficient_precision(core4):
    with pytest.raises(PrecisionError):
        regularized_singular_vector(core4, 1e-3, c=2j, dps=10)


def test_regular_solution_has_no_regularized_vector():
    with pytest.raises(NotSingularError):
        regularized_singular_vector(BetheSolution(4, PAIR4), 1e-8)


# Completeness
def test_four_site_completeness():
    cfg = SolverConfig(seed_grid=(-3.0, 3.0, 0.1), random_restarts=16, escalate=False)
    report = completeness_check(4, 2, solve_sector(4, 2, cfg))
    assert report.passed
    assert report.physical_count == report.expected_count == 2
    assert all(r.eigen_residual < 1e-6 for r in report.residuals)


def test_incomplete_census_fails():
    census = solve_sector(4, 2, SolverConfig(seed_grid=(-3.0, 3.0, 0.1), random_restarts=0, escalate=False))
    partial = SectorCensus(4, 2, census.solutions[:1], census.rc_count)
    report = completeness_check(4, 2, partial)
    assert not report.passed
    assert not report.checks["count"]


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_small_chains_are_complete(n):
    cfg = SolverConfig(precision_mode="extended")
    for ell in range(1, n // 2 + 1):
        report = completeness_check(n, ell, solve_sector(n, ell, cfg))
        assert report.passed, report.checks
