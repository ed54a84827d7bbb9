"""Exact-diagonalization oracle and the algebraic Bethe ansatz on dense vectors.

Vectors live on (C^2)^N with site 1 as the most significant bit and spin up
as 0. Operators act site by site on the (2,) * N tensor view, so the 2^N x 2^N
matrices are never formed.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence

import mpmath
import numpy as np
import scipy.sparse as sparse

from bethe_rc.bethe import HALF_I, arithmetic, energy, lift, nw_constant, nw_criterion, singular_pair
from bethe_rc.config import ORACLE_MAX_SITES
from bethe_rc.errors import NotSingularError, PrecisionError, ResourceError
from bethe_rc.models import BetheSolution, SectorCensus, SpectrumRecord, StateVector
from bethe_rc.schemas import SolutionResidual, VerificationReport

logger = logging.getLogger(__name__)

ENERGY_TOL = 1e-8
VECTOR_TOL = 1e-6
SINGULAR_EPSILON = 1e-8
# Limit of the regularized N=4 singular vector with c = 2i, nonzero entries
FOUR_SITE_SINGULAR = {3: 2, 6: -2, 9: -2, 12: 2}


def _check_size(n: int):
    if n > ORACLE_MAX_SITES:
        raise ResourceError(f"N={n} exceeds the oracle limit of {ORACLE_MAX_SITES} sites")


def vacuum(n: int, dps: Optional[int] = None) -> StateVector:
    """All spins up"""
    if dps is None:
        amplitudes = np.zeros(2**n, dtype=complex)
        amplitudes[0] = 1.0
    else:
        with mpmath.workdps(dps):
            amplitudes = np.array([mpmath.mpc(0)] * 2**n, dtype=object)
            amplitudes[0] = mpmath.mpc(1)
    return StateVector(n, amplitudes)


# Hamiltonian
def hamiltonian_apply(v: StateVector, J: float = 1.0) -> StateVector:
    """H = (J/2) sum_k (P_{k,k+1} - 1) with periodic closure; N = 2 counts its bond twice"""
    n = v.n_sites
    psi = v.amplitudes.reshape((2,) * n)
    out = np.zeros_like(psi)
    for k in range(n):
        out = out + (np.swapaxes(psi, k, (k + 1) % n) - psi)
    return StateVector(n, (out * (J / 2)).reshape(-1))


def _sector_states(n: int, ell: int) -> np.ndarray:
    states = [sum(1 << (n - 1 - k) for k in combo) for combo in itertools.combinations(range(n), ell)]
    return np.array(sorted(states), dtype=np.int64)


def sector_hamiltonian(n: int, ell: int, J: float = 1.0) -> sparse.csr_matrix:
    """Sparse H restricted to the ell-down-spin sector"""
    _check_size(n)
    states = _sector_states(n, ell)
    dim = len(states)
    rows, cols, vals = [], [], []
    diagonal = np.zeros(dim)
    for k in range(n):
        a, b = n - 1 - k, n - 1 - (k + 1) % n
        differ = ((states >> a) & 1) != ((states >> b) & 1)
        source = np.flatnonzero(differ)
        partners = np.searchsorted(states, states[source] ^ ((1 << a) | (1 << b)))
        rows.append(partners)
        cols.append(source)
        vals.append(np.full(source.size, J / 2))
        diagonal[source] -= J / 2
    rows.append(np.arange(dim))
    cols.append(np.arange(dim))
    vals.append(diagonal)
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return matrix.tocsr()


def sector_eigenvalues(n: int, ell: int, J: float = 1.0) -> np.ndarray:
    if not 0 <= ell <= n:
        raise ValueError(f"sector ell={ell} outside 0..{n}")
    matrix = sector_hamiltonian(n, ell, J)
    return np.sort(np.linalg.eigvalsh(matrix.toarray()))


def multiset_difference(values: Sequence[float], remove: Sequence[float], tol: float = ENERGY_TOL) -> List[float]:
    """Sorted values with one tolerance-match removed per element of remove"""
    left = sorted(values)
    out = []
    pending = sorted(remove)
    j = 0
    for value in left:
        while j < len(pending) and pending[j] < value - tol:
            j += 1
        if j < len(pending) and abs(pending[j] - value) <= tol:
            j += 1
            continue
        out.append(value)
    return out


def sector_spectrum(n: int, ell: int, J: float = 1.0) -> SpectrumRecord:
    """Sector eigenvalues and the highest-weight part left after removing sector ell-1"""
    eigenvalues = sector_eigenvalues(n, ell, J)
    if ell == 0:
        highest = list(eigenvalues)
    else:
        highest = multiset_difference(eigenvalues, sector_eigenvalues(n, ell - 1, J), tol=1e-9)
    expected = math.comb(n, ell) - (math.comb(n, ell - 1) if ell else 0)
    if 2 * ell <= n and len(highest) != expected:
        logger.warning("N=%d ell=%d: %d highest-weight energies, expected %d", n, ell, len(highest), expected)
    return SpectrumRecord(n, ell, tuple(float(e) for e in eigenvalues), tuple(float(e) for e in highest))


# Monodromy blocks
class LaxBlockAction:
    """Blocks of T_N(lam) = L_N(lam) ... L_1(lam) applied to vectors site by site.

    The auxiliary space is tracked as a pair of partial vectors; folding in
    site k maps (u0, u1) to (a_k u0 + b_k u1, c_k u0 + d_k u1).
    """

    def __init__(self, spectral_parameter, dps: Optional[int] = None):
        self.dps = dps
        with arithmetic(dps):
            self.spectral_parameter = lift([spectral_parameter], dps)[0]
            lam = self.spectral_parameter
            i = lift([1j], dps)[0]
            half = lift([HALF_I], dps)[0]
            zero = lift([0], dps)[0]
            self.a = ((lam + half, zero), (zero, lam - half))
            self.b = ((zero, zero), (i, zero))
            self.c = ((zero, i), (zero, zero))
            self.d = ((lam - half, zero), (zero, lam + half))

    @staticmethod
    def _site(matrix, psi: np.ndarray, k: int, n: int) -> np.ndarray:
        view = psi.reshape(2**k, 2, 2 ** (n - k - 1))
        out = np.empty_like(view)
        (m00, m01), (m10, m11) = matrix
        out[:, 0, :] = m00 * view[:, 0, :] + m01 * view[:, 1, :]
        out[:, 1, :] = m10 * view[:, 0, :] + m11 * view[:, 1, :]
        return out.reshape(-1)

    def apply(self, block: str, v: StateVector) -> StateVector:
        if block not in ("A", "B", "C", "D"):
            raise ValueError(f"unknown block {block!r}")
        n = v.n_sites
        zero = np.zeros_like(v.amplitudes)
        if v.is_extended:
            zero[:] = mpmath.mpc(0)
        if block in ("A", "C"):
            u0, u1 = v.amplitudes.copy(), zero
        else:
            u0, u1 = zero, v.amplitudes.copy()
        with arithmetic(self.dps):
            for k in range(n):
                u0, u1 = (
                    self._site(self.a, u0, k, n) + self._site(self.b, u1, k, n),
                    self._site(self.c, u0, k, n) + self._site(self.d, u1, k, n),
                )
        return StateVector(n, u0 if block in ("A", "B") else u1)


def transfer_block_apply(block: str, lam, v: StateVector, dps: Optional[int] = None) -> StateVector:
    if dps is None and v.is_extended:
        dps = mpmath.mp.dps
    return LaxBlockAction(lam, dps).apply(block, v)


def transfer_apply(lam, v: StateVector, dps: Optional[int] = None) -> StateVector:
    """tau(lam) v = (A + D) v"""
    a = transfer_block_apply("A", lam, v, dps)
    d = transfer_block_apply("D", lam, v, dps)
    return StateVector(v.n_sites, a.amplitudes + d.amplitudes)


def b_string(roots: Sequence, v: StateVector, dps: Optional[int] = None) -> StateVector:
    """B(l_1) ... B(l_m) v, rightmost factor first"""
    for lam in reversed(list(roots)):
        v = transfer_block_apply("B", lam, v, dps)
    return v


def bethe_vector(roots: Sequence, n: int, dps: Optional[int] = None) -> StateVector:
    """B(l_1) ... B(l_ell)|0>"""
    _check_size(n)
    with arithmetic(dps):
        psi = b_string(lift(roots, dps), vacuum(n, dps), dps)
        counts = psi.down_spin_counts(tol=1e-300 if dps is None else 0.0)
    assert counts <= {len(roots)}, f"Bethe vector leaves the {len(roots)}-down-spin sector: {counts}"
    return psi


def regularized_singular_vector(
    sol: BetheSolution,
    epsilon: float,
    n: Optional[int] = None,
    c: Optional[complex] = None,
    dps: Optional[int] = None,
) -> StateVector:
    """eps^-N B(i/2 + eps + c eps^N) B(-i/2 + eps) B(l_3) ... |0> in extended precision"""
    n = n or sol.n_sites
    _check_size(n)
    pair = singular_pair(sol.roots)
    if pair is None:
        raise NotSingularError(f"roots {sol.roots} do not contain the pair +-i/2")
    if c is None:
        if not nw_criterion(sol):
            raise NotSingularError("the singular solution is not physical")
        c = nw_constant(sol)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")

    digits = dps or max(30, int(n * -math.log10(epsilon)) + 20)
    if n * math.log10(epsilon) < -(digits - 4):
        raise PrecisionError(f"eps^N = {epsilon}^{n} is below the {digits}-digit working precision")
    with mpmath.workdps(digits):
        eps = mpmath.mpf(epsilon)
        upper = mpmath.mpc(0, 0.5) + eps + mpmath.mpc(c) * eps**n
        lower = mpmath.mpc(0, -0.5) + eps
        rest = [z for i, z in enumerate(sol.values(digits)) if i not in pair]
        psi = b_string([upper, lower] + rest, vacuum(n, digits), digits)
        scale = eps ** (-n)
        return StateVector(n, np.array([a * scale for a in psi.amplitudes], dtype=object))


# Comparisons
def eigen_residual(v: StateVector, value: float, J: float = 1.0) -> float:
    """||H v - E v|| / ||v||"""
    hv = hamiltonian_apply(v, J)
    if v.is_extended:
        norm = v.norm()
        if norm == 0:
            return math.inf
        diff = mpmath.sqrt(mpmath.fsum(abs(h - value * a) ** 2 for h, a in zip(hv.amplitudes, v.amplitudes)))
        return float(diff / norm)
    norm = v.norm()
    if norm == 0:
        return math.inf
    return float(np.linalg.norm(hv.amplitudes - value * v.amplitudes) / norm)


def aligned(v: StateVector) -> np.ndarray:
    """Unit norm with the largest amplitude made positive real"""
    amplitudes = v.as_complex()
    norm = np.linalg.norm(amplitudes)
    if norm == 0:
        return amplitudes
    lead = amplitudes[np.argmax(np.abs(amplitudes))]
    return amplitudes / norm * (abs(lead) / lead)


def vector_distance(v: StateVector, w: StateVector) -> float:
    return float(np.max(np.abs(aligned(v) - aligned(w))))


def solution_vector(sol: BetheSolution, epsilon: float = SINGULAR_EPSILON) -> StateVector:
    """Bethe vector of a regular solution, regularized vector of a physical singular one"""
    if sol.classification.is_singular:
        return regularized_singular_vector(sol, epsilon)
    dps = 30 if sol.precise is not None else None
    return bethe_vector(sol.values(dps), sol.n_sites, dps)


def completeness_check(n: int, ell: int, census: SectorCensus, J: float = 1.0) -> VerificationReport:
    """Count, energy multiset and eigenvector checks of a census against the ED spectrum"""
    _check_size(n)
    spectrum = sector_spectrum(n, ell, J)
    expected = math.comb(n, ell) - math.comb(n, ell - 1)
    physical = [(i, s) for i, s in enumerate(census.solutions) if s.classification.is_physical]

    residuals = []
    energies = []
    for index, sol in physical:
        value = energy(sol, J)
        energies.append(value)
        residual = eigen_residual(solution_vector(sol), value, J)
        residuals.append(
            SolutionResidual(
                index=index,
                classification=sol.classification.value,
                energy=value,
                eigen_residual=residual,
                passed=residual < VECTOR_TOL,
            )
        )

    unmatched_energies = multiset_difference(energies, spectrum.highest_weight_energies)
    unmatched_spectrum = multiset_difference(spectrum.highest_weight_energies, energies)
    checks = {
        "count": len(physical) == census.rc_count == expected,
        "energies": not unmatched_energies and not unmatched_spectrum,
        "vectors": all(r.passed for r in residuals),
    }
    if not all(checks.values()):
        logger.warning("N=%d ell=%d verification failed: %s", n, ell, checks)
    return VerificationReport(
        n=n,
        ell=ell,
        passed=all(checks.values()),
        physical_count=len(physical),
        rc_count=census.rc_count,
        expected_count=expected,
        unmatched_energies=unmatched_energies,
        unmatched_spectrum=unmatched_spectrum,
        residuals=residuals,
        checks=checks,
    )


def four_site_singular_deviation(epsilon: float = SINGULAR_EPSILON) -> float:
    """Distance of the regularized N=4 singular vector (c = 2i) from its known limit"""
    sol = BetheSolution(4, (0.5j, -0.5j))
    amplitudes = np.zeros(16, dtype=complex)
    for index, value in FOUR_SITE_SINGULAR.items():
        amplitudes[index] = value
    limit = StateVector(4, amplitudes)
    return vector_distance(regularized_singular_vector(sol, epsilon, c=2j), limit)
