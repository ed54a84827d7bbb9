"""Bethe equations, energies and singular-solution data.

All functions accept roots as Python complex numbers or mpmath numbers; with
``dps`` set the evaluation runs in mpmath at that many decimal digits.
"""

import contextlib
import logging
import math
from typing import List, Optional, Sequence, Tuple

import mpmath

from bethe_rc.errors import ConvergenceError, DivergentEnergyError, NotSingularError, PoleError
from bethe_rc.models import SINGULAR_TOL, BetheSolution, Classification, SingularRegularization

logger = logging.getLogger(__name__)

HALF_I = 0.5j

# Tolerance on |LHS - 1| of the physical singular criterion
NW_TOL = 1e-8

# Distance below which a spectral parameter is treated as hitting a root
POLE_TOL = 1e-12


def arithmetic(dps: Optional[int]):
    """Context for binary64 (dps None) or mpmath evaluation"""
    return contextlib.nullcontext() if dps is None else mpmath.workdps(dps)


def lift(values: Sequence, dps: Optional[int]) -> list:
    if dps is None:
        return [complex(v) for v in values]
    return [mpmath.mpc(v) for v in values]


def i_power(k: int):
    return (1, 1j, -1, -1j)[k % 4]


# Singular pairs
def singular_pair(roots: Sequence, tol: float = SINGULAR_TOL) -> Optional[Tuple[int, int]]:
    """Indices of the roots at +i/2 and -i/2, if both are present"""
    upper = [i for i, z in enumerate(roots) if abs(z - HALF_I) < tol]
    lower = [i for i, z in enumerate(roots) if abs(z + HALF_I) < tol]
    if upper and lower:
        return upper[0], lower[0]
    return None


def touches_singular_point(roots: Sequence, tol: float = SINGULAR_TOL) -> bool:
    return any(abs(z - HALF_I) < tol or abs(z + HALF_I) < tol for z in roots)


def _split_singular(sol: BetheSolution, dps: Optional[int] = None):
    pair = singular_pair(sol.roots)
    if pair is None:
        raise NotSingularError(f"roots {sol.roots} do not contain the pair +-i/2")
    values = sol.values(dps)
    rest = [z for i, z in enumerate(values) if i not in pair]
    return pair, rest


def classify_roots(roots: Sequence, n: int) -> Classification:
    pair = singular_pair(roots)
    if pair is None:
        return Classification.REGULAR
    rest = [complex(z) for i, z in enumerate(roots) if i not in pair]
    if abs(_criterion_value(rest, n, None) - 1) < NW_TOL:
        return Classification.PHYSICAL_SINGULAR
    return Classification.UNPHYSICAL_SINGULAR


# Residuals
def cleared_residual(roots: Sequence, n: int) -> list:
    """Polynomial form of the Bethe equations, one entry per root, scaled"""
    ell = len(roots)
    out = []
    for k, lk in enumerate(roots):
        plus = (lk + HALF_I) ** n
        minus = (lk - HALF_I) ** n
        for j, lj in enumerate(roots):
            if j != k:
                d = lk - lj
                plus *= d - 1j
                minus *= d + 1j
        scale = max(1, abs(lk) + 1) ** (n + ell - 1)
        out.append((plus - minus) / scale)
    return out


def bethe_residual(sol: BetheSolution, dps: Optional[int] = None) -> List[complex]:
    with arithmetic(dps):
        return [complex(r) for r in cleared_residual(sol.values(dps), sol.n_sites)]


def residual_norm(roots: Sequence, n: int, dps: Optional[int] = None) -> float:
    with arithmetic(dps):
        values = lift(roots, dps)
        return float(max(abs(r) for r in cleared_residual(values, n)))


def momentum_residual(roots: Sequence, n: int, dps: Optional[int] = None) -> float:
    """|prod_j ((l_j + i/2)/(l_j - i/2))^N - 1|, the product of all the equations.

    The cleared system is also solved by exact strings l, l - i whose centre is
    anywhere close to the axis; those fail this product. Undefined on roots at +-i/2.
    """
    if touches_singular_point(roots):
        raise ValueError(f"roots {roots} touch +-i/2")
    with arithmetic(dps):
        product = 1
        for z in lift(roots, dps):
            product *= (z + HALF_I) / (z - HALF_I)
        return float(abs(product**n - 1))


def make_solution(roots: Sequence, n: int, precise: Optional[Sequence] = None) -> BetheSolution:
    """Wrap roots with their residual and classification"""
    dps = None
    if precise is not None:
        dps = max(mpmath.mp.dps, 30)
    norm = residual_norm(precise if precise is not None else roots, n, dps)
    return BetheSolution(
        n_sites=n,
        roots=tuple(complex(z) for z in roots),
        residual_norm=norm,
        classification=classify_roots([complex(z) for z in roots], n),
        precise=None if precise is None else tuple(precise),
    )


# Energies
def _as_real(value, scale: float) -> float:
    if abs(value.imag) > 1e-10 * max(1.0, scale):
        raise ValueError(f"energy has an imaginary residue {value.imag}")
    return float(value.real)


def energy(sol: BetheSolution, J: float = 1.0, dps: Optional[int] = None) -> float:
    """Regular: -J/2 sum 1/(l^2 + 1/4); singular: -J - J/2 sum over the rest"""
    pair = singular_pair(sol.roots)
    if pair is None and touches_singular_point(sol.roots):
        raise DivergentEnergyError(f"a root of {sol.roots} sits at +-i/2 without its partner")
    if sol.classification.is_singular and pair is None:
        raise DivergentEnergyError("classification says singular but the pair +-i/2 is missing")
    if pair is not None and not sol.classification.is_singular:
        raise DivergentEnergyError(f"roots {sol.roots} contain +-i/2 but are classified {sol.classification.value}")
    with arithmetic(dps):
        values = sol.values(dps)
        if pair is None:
            total = -0.5 * J * sum(1 / (z * z + 0.25) for z in values)
        else:
            rest = [z for i, z in enumerate(values) if i not in pair]
            total = -J - 0.5 * J * sum((1 / (z * z + 0.25) for z in rest), 0)
        total = complex(total)
    return _as_real(total, abs(total))


# Singular solutions
def _criterion_value(rest: Sequence, n: int, dps: Optional[int]):
    with arithmetic(dps):
        product = 1
        for z in rest:
            product *= (z + HALF_I) / (z - HALF_I)
        return complex((-product) ** n)


def nw_criterion(sol: BetheSolution, dps: Optional[int] = None) -> bool:
    """(-prod_{j>=3} (l_j + i/2)/(l_j - i/2))^N == 1 within NW_TOL"""
    _, rest = _split_singular(sol, dps)
    return abs(_criterion_value(rest, sol.n_sites, dps) - 1) < NW_TOL


def nw_constants(sol: BetheSolution, dps: Optional[int] = None) -> Tuple[complex, complex]:
    """The regularization constant from both of its closed forms"""
    _, rest = _split_singular(sol, dps)
    n = sol.n_sites
    with arithmetic(dps):
        c = 2 * i_power(n + 1)
        c_alt = -2 / i_power(n + 1)
        for z in rest:
            c *= (z + 1.5j) / (z - HALF_I)
            c_alt *= (z - 1.5j) / (z + HALF_I)
        return complex(c), complex(c_alt)


def nw_constant(sol: BetheSolution, dps: Optional[int] = None) -> complex:
    c, c_alt = nw_constants(sol, dps)
    if nw_criterion(sol, dps):
        assert abs(c - c_alt) < 1e-8 * max(1.0, abs(c)), f"constants disagree: {c} vs {c_alt}"
    return c


def regularized_roots(sol: BetheSolution, reg: SingularRegularization, dps: Optional[int] = None) -> list:
    """The pair replaced by i/2 + eps + c eps^N and -i/2 + eps, other roots kept"""
    pair, rest = _split_singular(sol, dps)
    n = sol.n_sites
    with arithmetic(dps):
        if dps is None:
            eps, c = float(reg.epsilon), complex(reg.c)
        else:
            eps, c = mpmath.mpf(reg.epsilon), mpmath.mpc(reg.c)
        upper = HALF_I + eps + c * eps**n
        lower = -HALF_I + eps
        return [upper, lower] + list(rest)


# Transfer-matrix eigenvalue
def _eigenvalue_terms(lam, roots: Sequence, n: int):
    """Value and derivative of Lambda(lam) without dividing by vanishing factors"""
    g1, dg1 = 1, 0
    g2, dg2 = 1, 0
    for mu in roots:
        d = lam - mu
        if abs(d) < POLE_TOL:
            raise PoleError(f"spectral parameter {complex(lam)} coincides with root {complex(mu)}")
        r1, dr1 = (d - 1j) / d, 1j / d**2
        r2, dr2 = (d + 1j) / d, -1j / d**2
        dg1 = dg1 * r1 + g1 * dr1
        g1 = g1 * r1
        dg2 = dg2 * r2 + g2 * dr2
        g2 = g2 * r2
    up = lam + HALF_I
    down = lam - HALF_I
    value = up**n * g1 + down**n * g2
    deriv = n * up ** (n - 1) * g1 + up**n * dg1 + n * down ** (n - 1) * g2 + down**n * dg2
    return value, deriv


def transfer_eigenvalue(lam, roots: Sequence, n: int, dps: Optional[int] = None):
    with arithmetic(dps):
        value, _ = _eigenvalue_terms(lift([lam], dps)[0], lift(roots, dps), n)
        return value


def offshell_eigenvalue(lam, sol: BetheSolution, dps: Optional[int] = None) -> complex:
    """Lambda(lam; roots), the transfer-matrix eigenvalue when on shell"""
    with arithmetic(dps):
        value, _ = _eigenvalue_terms(lift([lam], dps)[0], sol.values(dps), sol.n_sites)
        return complex(value)


def offshell_coefficient(k: int, lam, sol: BetheSolution, dps: Optional[int] = None) -> complex:
    """Lambda_k(lam; roots) for 1 <= k <= ell; zero on shell"""
    if not 1 <= k <= sol.ell:
        raise IndexError(f"root index {k} outside 1..{sol.ell}")
    n = sol.n_sites
    with arithmetic(dps):
        lam = lift([lam], dps)[0]
        roots = sol.values(dps)
        lk = roots[k - 1]
        if abs(lam - lk) < POLE_TOL:
            raise PoleError(f"spectral parameter {complex(lam)} coincides with root {complex(lk)}")
        first = (lk + HALF_I) ** n
        second = (lk - HALF_I) ** n
        for j, lj in enumerate(roots):
            if j != k - 1:
                first *= (lk - lj - 1j) / (lk - lj)
                second *= (lj - lk - 1j) / (lj - lk)
        return complex(1j / (lam - lk) * (first - second))


def logderivative_energy(
    roots: Sequence, n: int, J: float = 1.0, dps: Optional[int] = None, step: Optional[float] = None
) -> float:
    """E = (iJ/2) Lambda'(i/2) / Lambda(i/2) - NJ/2.

    With ``step`` the derivative is a central finite difference instead of
    the product-rule value.
    """
    with arithmetic(dps):
        values = lift(roots, dps)
        point = lift([HALF_I], dps)[0]
        value, deriv = _eigenvalue_terms(point, values, n)
        if step is not None:
            ahead, _ = _eigenvalue_terms(point + step, values, n)
            behind, _ = _eigenvalue_terms(point - step, values, n)
            deriv = (ahead - behind) / (2 * step)
        result = complex(0.5j * J * deriv / value - 0.5 * n * J)
    return float(result.real)


def singular_energy_logderivative(
    sol: BetheSolution,
    reg: Optional[SingularRegularization] = None,
    J: float = 1.0,
    decades: int = 4,
    dps: Optional[int] = None,
) -> float:
    """Energy of a physical singular solution from the regularized transfer matrix.

    The log-derivative is evaluated for eps, eps/10, ... and the sequence is
    extrapolated to eps = 0 assuming a linear leading correction.
    """
    _split_singular(sol)
    if not nw_criterion(sol):
        raise NotSingularError("the singular solution is not physical")
    c = reg.c if reg is not None else nw_constant(sol)
    start = reg.epsilon if reg is not None else 1e-3
    schedule = [start * 10.0 ** (-k) for k in range(decades)]
    digits = max(dps or 0, int(sol.n_sites * -math.log10(schedule[-1])) + 30)

    with mpmath.workdps(digits):
        values = []
        for eps in schedule:
            roots = regularized_roots(sol, SingularRegularization(eps, c), dps=digits)
            values.append(mpmath.mpf(logderivative_energy(roots, sol.n_sites, J, dps=digits)))
        extrapolated = [b + (b - a) / 9 for a, b in zip(values, values[1:])]

    if len(extrapolated) < 2:
        return float(extrapolated[-1] if extrapolated else values[-1])
    last, previous = extrapolated[-1], extrapolated[-2]
    if abs(last - previous) > 1e-7 * max(1, abs(last)):
        raise ConvergenceError(f"extrapolated energies {float(previous)} and {float(last)} disagree")
    logger.debug("singular energy sequence %s", [float(v) for v in values])
    return float(last)
