"""Multi-start Newton solver for the Bethe equations of a sector.

Seeds are refined in batches with a vectorised damped Newton iteration on the
cleared-denominator system. In extended mode every candidate is polished again
in mpmath, which resolves the centres of narrow strings whose defining terms
sit many orders of magnitude below the leading ones. Seeds carrying the exact
pair +-i/2 are solved with that pair pinned: the first two equations vanish
identically on it and only the remaining roots are unknown.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from bethe_rc import strings
from bethe_rc.bethe import HALF_I, arithmetic, make_solution, momentum_residual
from bethe_rc.errors import DegenerateDegreeError
from bethe_rc.models import BetheSolution, Classification, Partition, SectorCensus, SectorShape, canonical_key
from bethe_rc.rigged import admissible_contents, count_rigged_configs, count_for_content, partitions
from bethe_rc.schemas import SolverConfig

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30
DIVERGENCE_RADIUS = 1e6
# Iterates this close to the pair +-i/2 are re-solved with the pair pinned
CORE_SNAP_TOL = 1e-6
# Residual below which an unconverged iterate is still worth polishing
LOOSE_TOL = 1e-8
# Merge radius for unconverged candidates before polishing
LOOSE_MERGE = 1e-5
# Largest conjugation mismatch a candidate may have before symmetrizing
CLOSURE_TOL = 1e-4
# Tolerance on the product of all equations
MOMENTUM_TOL = 1e-6
FUSION_OFFSETS = (0.02, 0.1)

CORE = np.array([0.5j, -0.5j])

RUNNING, CONVERGED, NEAR, FAILED = 0, 1, 2, 3


@dataclass(frozen=True)
class NewtonFailure:
    """Why a seed did not produce a solution"""

    reason: str
    last: Tuple[complex, ...]
    residual: float


class _SequentialExecutor:
    """Stand-in for ProcessPoolExecutor that maps in the calling process"""

    def __init__(self, *args, **kwargs):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        return False

    @staticmethod
    def map(fun, *iterables, **kwargs):
        return map(fun, *iterables)


def _executor(threads: int):
    if threads > 1:
        return ProcessPoolExecutor(max_workers=threads)
    return _SequentialExecutor()


# Cleared-denominator system, batched
def _leave_one_out(factors: np.ndarray) -> np.ndarray:
    """Products over the last axis with each position left out, no division"""
    ones = np.ones(factors.shape[:-1] + (1,), dtype=factors.dtype)
    prefix = np.cumprod(np.concatenate([ones, factors[..., :-1]], axis=-1), axis=-1)
    suffix = np.cumprod(np.concatenate([ones, factors[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return prefix * suffix


def _batch_system(free: np.ndarray, fixed: np.ndarray, n: int, jacobian: bool = True):
    """Residuals F (B, m), Jacobian (B, m, m) and row scales for free roots"""
    batch, m = free.shape
    full = np.concatenate([free, np.broadcast_to(fixed, (batch, fixed.size))], axis=1)
    ell = full.shape[1]
    diff = free[:, :, None] - full[:, None, :]
    self_mask = np.zeros((m, ell), dtype=bool)
    self_mask[np.arange(m), np.arange(m)] = True
    minus_i = np.where(self_mask, 1.0, diff - 1j)
    plus_i = np.where(self_mask, 1.0, diff + 1j)

    up = free + 0.5j
    down = free - 0.5j
    up_low = up ** (n - 1)
    down_low = down ** (n - 1)
    up_n = up_low * up
    down_n = down_low * down
    prod_minus = np.prod(minus_i, axis=-1)
    prod_plus = np.prod(plus_i, axis=-1)
    residual = up_n * prod_minus - down_n * prod_plus
    scale = np.maximum(1.0, np.abs(free) + 1.0) ** (n + ell - 1)
    if not jacobian:
        return residual, None, scale

    loo_minus = _leave_one_out(minus_i)
    loo_plus = _leave_one_out(plus_i)
    jac = -up_n[:, :, None] * loo_minus[:, :, :m] + down_n[:, :, None] * loo_plus[:, :, :m]
    diag = np.arange(m)
    sum_minus = loo_minus.sum(axis=-1) - loo_minus[:, diag, diag]
    sum_plus = loo_plus.sum(axis=-1) - loo_plus[:, diag, diag]
    jac[:, diag, diag] = (
        n * up_low * prod_minus + up_n * sum_minus - n * down_low * prod_plus - down_n * sum_plus
    )
    return residual, jac, scale


def _batch_norm(free: np.ndarray, fixed: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(all="ignore"):
        residual, _, scale = _batch_system(free, fixed, n, jacobian=False)
        norm = np.max(np.abs(residual) / scale, axis=1)
    return np.where(np.isfinite(norm), norm, np.inf)


def _solve_steps(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return (np.linalg.pinv(jac) @ rhs[..., None])[..., 0]


def newton_batch(seeds: np.ndarray, fixed: np.ndarray, n: int, cfg: SolverConfig):
    """Damped Newton on a batch of seeds.

    Returns the final iterates, a status per seed (CONVERGED, NEAR or FAILED)
    and the final scaled residual norms.
    """
    lam = np.array(seeds, dtype=complex)
    batch = lam.shape[0]
    status = np.full(batch, RUNNING)
    norms = np.full(batch, np.inf)
    if lam.shape[1] == 0:
        status[:] = CONVERGED
        norms[:] = 0.0
        return lam, status, norms

    active = np.arange(batch)
    for _ in range(cfg.max_iters):
        if active.size == 0:
            break
        x = lam[active]
        with np.errstate(all="ignore"):
            residual, jac, scale = _batch_system(x, fixed, n)
            r = np.max(np.abs(residual) / scale, axis=1)
        finite = np.isfinite(r) & np.isfinite(jac).all(axis=(1, 2))
        jac[~finite] = np.eye(x.shape[1])
        residual[~finite] = 0.0
        with np.errstate(all="ignore"):
            delta = _solve_steps(jac, -residual)
        finite &= np.isfinite(delta).all(axis=1)
        step = np.where(finite, np.max(np.abs(np.where(np.isfinite(delta), delta, 0)), axis=1), np.inf)

        done = finite & (r < cfg.newton_tol) & (step < cfg.step_tol)
        norms[active] = np.where(finite, r, np.inf)
        status[active[done]] = CONVERGED
        status[active[~finite]] = FAILED

        moving = finite & ~done
        idx = np.flatnonzero(moving)
        if idx.size:
            t = np.ones(idx.size)
            trial = x[idx] + delta[idx]
            trial_norm = _batch_norm(trial, fixed, n)
            pending = ~(trial_norm < r[idx])
            for _ in range(MAX_HALVINGS):
                if not pending.any():
                    break
                t[pending] *= 0.5
                trial[pending] = x[idx][pending] + t[pending, None] * delta[idx][pending]
                trial_norm[pending] = _batch_norm(trial[pending], fixed, n)
                pending &= ~(trial_norm < r[idx])
            accepted = ~pending
            lam[active[idx[accepted]]] = trial[accepted]
            norms[active[idx[accepted]]] = trial_norm[accepted]
            stalled = active[idx[pending]]
            status[stalled] = np.where(r[idx][pending] < LOOSE_TOL, NEAR, FAILED)
            diverged = active[idx[accepted]][np.max(np.abs(trial[accepted]), axis=1) > DIVERGENCE_RADIUS]
            status[diverged] = FAILED
        active = active[status[active] == RUNNING]

    status[active] = np.where(norms[active] < LOOSE_TOL, NEAR, FAILED)
    return lam, status, norms


# Cleared-denominator system, scalar (mpmath or complex)
def _scalar_system(free: Sequence, fixed: Sequence, n: int):
    full = list(free) + list(fixed)
    ell = len(full)
    m = len(free)
    residual, jac, scales = [], [], []
    for k, lk in enumerate(free):
        up, down = lk + HALF_I, lk - HALF_I
        up_low, down_low = up ** (n - 1), down ** (n - 1)
        up_n, down_n = up_low * up, down_low * down
        minus = [lk - lj - 1j for j, lj in enumerate(full) if j != k]
        plus = [lk - lj + 1j for j, lj in enumerate(full) if j != k]
        others = [j for j in range(ell) if j != k]
        prod_minus = _product(minus)
        prod_plus = _product(plus)
        residual.append(up_n * prod_minus - down_n * prod_plus)
        scales.append(max(1, abs(lk) + 1) ** (n + ell - 1))
        row = [0] * m
        loo_minus = [_product(minus[:a] + minus[a + 1:]) for a in range(len(minus))]
        loo_plus = [_product(plus[:a] + plus[a + 1:]) for a in range(len(plus))]
        for a, j in enumerate(others):
            if j < m:
                row[j] = -up_n * loo_minus[a] + down_n * loo_plus[a]
        row[k] = n * up_low * prod_minus + up_n * sum(loo_minus) - n * down_low * prod_plus - down_n * sum(loo_plus)
        jac.append(row)
    return residual, jac, scales


def _product(values):
    out = 1
    for v in values:
        out = out * v
    return out


def polish_extended(free: Sequence, fixed: Sequence, n: int, cfg: SolverConfig):
    """Damped Newton in mpmath; returns (roots, scaled residual) or None"""
    dps = cfg.extended_dps
    with mpmath.workdps(dps):
        x = [mpmath.mpc(z) for z in free]
        pinned = [mpmath.mpc(z) for z in fixed]
        step_floor = mpmath.mpf(10) ** (-(dps // 3))

        def norm_of(values):
            residual, _, scales = _scalar_system(values, pinned, n)
            return max((abs(r) / s for r, s in zip(residual, scales)), default=mpmath.mpf(0))

        if not x:
            return pinned, mpmath.mpf(0)
        for _ in range(cfg.max_iters):
            residual, jac, scales = _scalar_system(x, pinned, n)
            r = max(abs(v) / s for v, s in zip(residual, scales))
            try:
                delta = mpmath.lu_solve(mpmath.matrix(jac), mpmath.matrix([-v for v in residual]))
            except ZeroDivisionError:
                return None
            delta = [delta[i] for i in range(len(x))]
            step = max(abs(d) for d in delta)
            if step < step_floor:
                break
            t = mpmath.mpf(1)
            for _ in range(MAX_HALVINGS + 1):
                trial = [a + t * d for a, d in zip(x, delta)]
                if norm_of(trial) < r:
                    break
                t /= 2
            else:
                break
            x = trial
            if max(abs(v) for v in x) > DIVERGENCE_RADIUS:
                return None
        final = norm_of(x)
        if not final < cfg.newton_tol:
            return None
        return x + pinned, final


# Seeds
def phase_grid(n: int, length: int, points_per_site: int) -> np.ndarray:
    """String centres spread uniformly in the phase (m/2) cot(theta/2)"""
    count = points_per_site * n
    theta = np.pi * (np.arange(count) + 0.5) / count
    grid = 0.5 * length / np.tan(theta)
    return np.concatenate([grid, [0.0]])


def real_grid(cfg: SolverConfig) -> np.ndarray:
    low, high, step = cfg.seed_grid
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    return low + step * np.arange(count)


def _ladder(center: float, length: int, deviation: float) -> List[complex]:
    half = (length - 1) / 2
    return [complex(center, (s - half) * (1 + deviation)) for s in range(length)]


def _center_choices(content: Partition, n: int, cfg: SolverConfig):
    """Centre tuples: strictly increasing within equal lengths, product across lengths"""
    per_length = []
    for length in content.distinct_rows():
        grid = np.unique(np.round(phase_grid(n, length, cfg.phase_points), 12))
        per_length.append(
            [(length, combo) for combo in itertools.combinations(grid, content.multiplicity(length))]
        )
    for choice in itertools.product(*per_length):
        yield [(length, c) for length, combo in choice for c in combo]


def string_seeds(content: Partition, n: int, cfg: SolverConfig) -> List[List[complex]]:
    """Ladder seeds a + (s - (m-1)/2) i (1 + delta) plus fused 3-string/1-string seeds"""
    deviations = cfg.string_seed_deviations if content.parts[0] > 1 else (0.0,)
    seeds = []
    for centers in _center_choices(content, n, cfg):
        for deviation in deviations:
            seeds.append([z for length, c in centers for z in _ladder(c, length, deviation)])
    odd_long = [m for m in content.distinct_rows() if m >= 3 and m % 2 == 1]
    if odd_long and content.multiplicity(1):
        # A 3-string whose middle root pairs with a 1-string at the same centre
        reduced = list(content.parts)
        reduced.remove(odd_long[-1])
        reduced.remove(1)
        rest = Partition(tuple(reduced))
        grid = phase_grid(n, odd_long[-1], cfg.phase_points)
        rest_choices = list(_center_choices(rest, n, cfg)) if rest.parts else [[]]
        for a in grid:
            for offset in FUSION_OFFSETS:
                core = _ladder(a, odd_long[-1], 0.0)
                middle = len(core) // 2
                core[middle] = complex(a, offset)
                fused = core + [complex(a, -offset)]
                for centers in rest_choices:
                    seeds.append(fused + [z for length, c in centers for z in _ladder(c, length, 0.0)])
    return seeds


def _real_seeds(count: int, n: int, cfg: SolverConfig) -> List[List[complex]]:
    if count == 0:
        return [[]]
    grid = real_grid(cfg) if count <= 2 else phase_grid(n, 1, cfg.phase_points)
    return [list(map(complex, combo)) for combo in itertools.combinations(grid, count)]


def seed_set(
    n: int, ell: int, cfg: Optional[SolverConfig] = None, content_filter: Optional[Partition] = None
) -> np.ndarray:
    """Real grid tuples, string-ansatz seeds, singular-core seeds and random restarts"""
    cfg = cfg or SolverConfig()
    if 2 * ell > n:
        raise ValueError(f"ell={ell} exceeds N/2 for N={n}")
    shape = SectorShape.spin_half(n)
    contents = [content_filter] if content_filter is not None else admissible_contents(shape, ell)

    seeds: List[List[complex]] = []
    if content_filter is None or content_filter.parts == (1,) * ell:
        seeds.extend(_real_seeds(ell, n, cfg))
    n_grid = len(seeds)
    for content in contents:
        if content.parts != (1,) * ell:
            seeds.extend(string_seeds(content, n, cfg))
    if ell >= 2:
        core = [0.5j, -0.5j]
        for rest in _real_seeds(ell - 2, n, cfg) if ell - 2 <= 2 else []:
            seeds.append(core + rest)
        if ell > 2:
            for rest_content in partitions(ell - 2):
                if rest_content.parts != (1,) * (ell - 2):
                    seeds.extend(core + s for s in string_seeds(rest_content, n, cfg))
            if ell - 2 > 2:
                seeds.extend(core + s for s in _real_seeds(ell - 2, n, cfg))

    rng = np.random.default_rng(cfg.rng_seed)
    for _ in range(cfg.random_restarts):
        content = contents[rng.integers(len(contents))]
        centers = rng.normal(scale=1.0 + 0.1 * n, size=content.length)
        seed = [z for length, c in zip(content.parts, centers) for z in _ladder(c, length, 0.0)]
        noise = rng.normal(scale=0.05, size=ell) + 1j * rng.normal(scale=0.05, size=ell)
        seeds.append([z + e for z, e in zip(seed, noise)])

    array = np.array(seeds, dtype=complex).reshape(len(seeds), ell)
    if len(array) > cfg.max_seeds:
        # grid seeds are thinned first so string and core seeds survive the cap
        logger.warning("capping %d seeds at %d", len(array), cfg.max_seeds)
        structured = np.arange(n_grid, len(array))
        room = cfg.max_seeds - len(structured)
        if room >= 0:
            grid = rng.choice(n_grid, size=min(room, n_grid), replace=False)
            keep = np.sort(np.concatenate([grid, structured]))
        else:
            keep = np.sort(rng.choice(structured, size=cfg.max_seeds, replace=False))
        array = array[keep]
    return array


# Pool workers
def _is_pinned(seed: np.ndarray) -> bool:
    return bool(np.any(seed == 0.5j) and np.any(seed == -0.5j))


def _unpin(seed: np.ndarray) -> np.ndarray:
    rest = list(seed)
    rest.remove(0.5j)
    rest.remove(-0.5j)
    return np.array(rest, dtype=complex)


def _solve_chunk(job) -> List[Tuple[Tuple[complex, ...], int, float, bool]]:
    """Worker: Newton on one chunk; returns (roots, status, residual, pinned) rows"""
    seeds, pinned, n, cfg = job
    fixed = CORE if pinned else np.zeros(0, dtype=complex)
    lam, status, norms = newton_batch(seeds, fixed, n, cfg)
    out = []
    for row, code, norm in zip(lam, status, norms):
        if code in (CONVERGED, NEAR) or (not pinned and _near_core(row)):
            roots = tuple(complex(z) for z in row) + tuple(complex(z) for z in fixed)
            out.append((roots, int(code), float(norm), pinned))
    return out


def _near_core(roots: Sequence) -> bool:
    return any(abs(z - 0.5j) < CORE_SNAP_TOL for z in roots) and any(abs(z + 0.5j) < CORE_SNAP_TOL for z in roots)


def _polish_job(job):
    free, pinned, n, cfg = job
    fixed = [0.5j, -0.5j] if pinned else []
    return polish_extended(free, fixed, n, cfg)


def _chunks(array: np.ndarray, size: int):
    for start in range(0, len(array), size):
        yield array[start:start + size]


# Candidates to solutions
def _symmetrize(values: list, tol: float = 1e-7) -> Optional[list]:
    """Average conjugate partners so that the multiset is exactly closed.

    Partners further apart than tol are left as they are; None when some root
    has no partner within CLOSURE_TOL.
    """
    remaining = list(range(len(values)))
    out = list(values)
    exact = True
    while remaining:
        i = remaining.pop(0)
        zi = values[i]
        kind = type(zi)
        if abs(complex(zi).imag) < tol:
            out[i] = kind(zi.real, 0)
            continue
        target = complex(zi).conjugate()
        partner = min(remaining, key=lambda j: abs(complex(values[j]) - target), default=None)
        gap = math.inf if partner is None else abs(complex(values[partner]) - target)
        if gap > CLOSURE_TOL:
            if abs(complex(zi).imag) < CLOSURE_TOL / 2:
                exact = False
                continue
            return None
        remaining.remove(partner)
        if gap > tol:
            exact = False
            continue
        zj = values[partner]
        out[i] = kind((zi.real + zj.real) / 2, (zi.imag - zj.imag) / 2)
        out[partner] = out[i].conjugate()
    return out if exact else list(values)


def _min_separation(roots: Sequence) -> float:
    values = [complex(z) for z in roots]
    if len(values) < 2:
        return math.inf
    return min(abs(a - b) for a, b in itertools.combinations(values, 2))


def accept_candidate(
    roots: Sequence, n: int, cfg: SolverConfig, precise: Optional[Sequence] = None
) -> Union[BetheSolution, NewtonFailure]:
    """Turn a converged iterate into a solution, or say why it is not one"""
    doubles = tuple(complex(z) for z in roots)
    if _min_separation(doubles) < cfg.dedup_tol:
        return NewtonFailure("repeated_root", doubles, math.inf)
    if max(abs(z) for z in doubles) > DIVERGENCE_RADIUS:
        return NewtonFailure("divergence", doubles, math.inf)
    dps = None if precise is None else cfg.extended_dps
    with arithmetic(dps):
        closed = _symmetrize(list(doubles if precise is None else precise))
        if closed is None:
            return NewtonFailure("not_self_conjugate", doubles, math.inf)
        doubles = tuple(complex(z) for z in closed)
        solution = make_solution(doubles, n, None if precise is None else closed)
    if not solution.residual_norm < cfg.newton_tol:
        return NewtonFailure("residual", doubles, solution.residual_norm)
    if solution.classification == Classification.REGULAR:
        momentum = momentum_residual(closed, n, dps)
        if momentum > MOMENTUM_TOL:
            return NewtonFailure("momentum", doubles, momentum)
    return solution


def _solution_key(sol: BetheSolution) -> tuple:
    return tuple(part for z in sol.roots for part in canonical_key(z))


def merge_solutions(solutions: Sequence[BetheSolution], tol: float) -> List[BetheSolution]:
    """Canonical sort, then drop entries within tol of a kept one (lowest residual wins)"""
    ordered = sorted(solutions, key=_solution_key)
    kept: List[BetheSolution] = []
    for sol in ordered:
        lead = -sol.roots[0].real
        duplicate = None
        for position in range(len(kept) - 1, -1, -1):
            other = kept[position]
            if lead - (-other.roots[0].real) > tol + 1e-9:
                break
            if sol.distance(other) < tol:
                duplicate = position
                break
        if duplicate is None:
            kept.append(sol)
        elif sol.residual_norm < kept[duplicate].residual_norm:
            kept[duplicate] = sol
    return sorted(kept, key=_solution_key)


def _merge_raw(rows: List[tuple], tol: float) -> List[tuple]:
    """Coarse merge of raw candidate rows keyed by their canonical root order"""
    keyed = []
    for roots, code, norm, pinned in rows:
        ordered = tuple(sorted(roots, key=canonical_key))
        keyed.append((ordered, code, norm, pinned))
    keyed.sort(key=lambda row: tuple(p for z in row[0] for p in canonical_key(z)))
    kept: List[tuple] = []
    for row in keyed:
        duplicate = False
        for other in reversed(kept):
            if abs(row[0][0].real - other[0][0].real) > tol + 1e-9:
                break
            if max(abs(a - b) for a, b in zip(row[0], other[0])) < tol:
                duplicate = True
                break
        if not duplicate:
            kept.append(row)
    return kept


def _images(sol: BetheSolution) -> List[Tuple[tuple, Optional[tuple]]]:
    """Root negation and complex conjugation of a solution"""
    out = []
    precise = sol.precise
    out.append((tuple(-z for z in sol.roots), None if precise is None else tuple(-z for z in precise)))
    out.append(
        (tuple(z.conjugate() for z in sol.roots), None if precise is None else tuple(z.conjugate() for z in precise))
    )
    return out


# Public operations
def newton_refine(seed: Sequence, n: int, cfg: Optional[SolverConfig] = None) -> Union[BetheSolution, NewtonFailure]:
    """Refine one seed; returns a solution or the reason it failed"""
    cfg = cfg or SolverConfig()
    seed = np.array(seed, dtype=complex)
    if seed.size == 0:
        raise ValueError("a seed needs at least one root")
    pinned = _is_pinned(seed)
    free = _unpin(seed) if pinned else seed
    fixed = CORE if pinned else np.zeros(0, dtype=complex)
    lam, status, norms = newton_batch(free[None, :], fixed, n, cfg)
    roots = list(lam[0]) + list(fixed)
    if not pinned and _near_core(roots):
        return newton_refine(_snap(roots), n, cfg)
    if cfg.extended or status[0] == NEAR:
        if status[0] == FAILED:
            return NewtonFailure("max_iters", tuple(roots), float(norms[0]))
        polished = polish_extended(list(lam[0]), list(fixed), n, cfg)
        if polished is None:
            return NewtonFailure("stalled", tuple(roots), float(norms[0]))
        values, _ = polished
        if not pinned and _near_core(values):
            return newton_refine(_snap(values), n, cfg)
        if not cfg.extended:
            return accept_candidate([complex(z) for z in values], n, cfg)
        return accept_candidate(values, n, cfg, precise=values)
    if status[0] != CONVERGED:
        return NewtonFailure("max_iters", tuple(roots), float(norms[0]))
    return accept_candidate(roots, n, cfg)


def _snap(roots: Sequence) -> np.ndarray:
    values = [complex(z) for z in roots]
    upper = min(range(len(values)), key=lambda i: abs(values[i] - 0.5j))
    lower = min((i for i in range(len(values)) if i != upper), key=lambda i: abs(values[i] + 0.5j))
    rest = [z for i, z in enumerate(values) if i not in (upper, lower)]
    return np.array([0.5j, -0.5j] + rest, dtype=complex)


def _run_batches(seeds: np.ndarray, n: int, cfg: SolverConfig) -> List[tuple]:
    pinned_mask = np.array([_is_pinned(s) for s in seeds], dtype=bool) if len(seeds) else np.zeros(0, bool)
    jobs = []
    free_seeds = seeds[~pinned_mask]
    pinned_seeds = seeds[pinned_mask]
    for chunk in _chunks(free_seeds, cfg.seed_chunk):
        jobs.append((chunk, False, n, cfg))
    if len(pinned_seeds):
        reduced = np.array([_unpin(s) for s in pinned_seeds], dtype=complex).reshape(len(pinned_seeds), seeds.shape[1] - 2)
        for chunk in _chunks(reduced, cfg.seed_chunk):
            jobs.append((chunk, True, n, cfg))

    rows: List[tuple] = []
    with _executor(cfg.threads) as pool:
        for result in pool.map(_solve_chunk, jobs):
            rows.extend(result)
    logger.info("%d seeds gave %d candidate iterates", len(seeds), len(rows))

    # Free iterates that ran into the pair +-i/2 are solved again with it pinned
    snapped = [row for row in rows if not row[3] and _near_core(row[0])]
    if snapped:
        reduced = np.array([_unpin(_snap(row[0])) for row in snapped], dtype=complex).reshape(len(snapped), len(snapped[0][0]) - 2)
        rows = [row for row in rows if row[3] or not _near_core(row[0])]
        with _executor(cfg.threads) as pool:
            for result in pool.map(_solve_chunk, [(c, True, n, cfg) for c in _chunks(reduced, cfg.seed_chunk)]):
                rows.extend(result)
    return rows


def _finalize(rows: List[tuple], n: int, cfg: SolverConfig) -> List[BetheSolution]:
    failures: Dict[str, int] = {}
    accepted: List[BetheSolution] = []

    def record(outcome):
        if isinstance(outcome, BetheSolution):
            accepted.append(outcome)
        else:
            failures[outcome.reason] = failures.get(outcome.reason, 0) + 1
            logger.debug("candidate rejected (%s): %s", outcome.reason, outcome.last)

    converged = [row for row in rows if row[1] == CONVERGED]
    near = [row for row in rows if row[1] == NEAR]
    if cfg.extended:
        candidates = _merge_raw(converged, cfg.dedup_tol / 10) + _merge_raw(near, LOOSE_MERGE)
        jobs = []
        for roots, _, _, pinned in candidates:
            free = list(roots)
            if pinned:
                free.remove(0.5j)
                free.remove(-0.5j)
            jobs.append((free, pinned, n, cfg))
        logger.info("polishing %d candidates at %d digits", len(jobs), cfg.extended_dps)
        with _executor(cfg.threads) as pool:
            for job, polished in zip(jobs, pool.map(_polish_job, jobs)):
                if polished is None:
                    failures["polish"] = failures.get("polish", 0) + 1
                    continue
                values, _ = polished
                if not job[1] and _near_core(values):
                    snapped = _unpin(_snap(values))
                    polished = polish_extended(list(snapped), [0.5j, -0.5j], n, cfg)
                    if polished is None:
                        failures["polish"] = failures.get("polish", 0) + 1
                        continue
                    values, _ = polished
                record(accept_candidate(values, n, cfg, precise=values))
    else:
        if near:
            logger.info("%d ill-conditioned iterates need extended precision", len(near))
        for roots, _, _, _ in _merge_raw(converged, cfg.dedup_tol / 10):
            record(accept_candidate(roots, n, cfg))

    # Negation and conjugation images are solutions as well
    images = []
    for sol in accepted:
        for roots, precise in _images(sol):
            if precise is not None:
                with mpmath.workdps(cfg.extended_dps):
                    images.append(make_solution(roots, n, precise))
            else:
                images.append(make_solution(roots, n))
    accepted.extend(s for s in images if s.residual_norm < cfg.newton_tol)

    if failures:
        logger.info("rejected candidates by reason: %s", failures)
    return merge_solutions(accepted, cfg.dedup_tol)


def build_census(
    n: int, ell: int, solutions: Sequence[BetheSolution], content_filter: Optional[Partition] = None
) -> SectorCensus:
    shape = SectorShape.spin_half(n)
    if content_filter is not None:
        solutions = [s for s in solutions if strings.matches_content(s, content_filter)]
        rc_count = count_for_content(shape, content_filter)
    else:
        rc_count = count_rigged_configs(shape, ell)
    return SectorCensus(
        n_sites=n,
        ell=ell,
        solutions=tuple(solutions),
        rc_count=rc_count,
        content_filter=content_filter,
    )


def solve_sector(
    n: int, ell: int, cfg: Optional[SolverConfig] = None, content_filter: Optional[Partition] = None
) -> SectorCensus:
    """All pairwise-distinct solutions of the sector reachable from the seed set"""
    cfg = cfg or SolverConfig()
    if 2 * ell > n:
        raise ValueError(f"ell={ell} exceeds N/2 for N={n}")
    seeds = seed_set(n, ell, cfg, content_filter)
    logger.info("solving N=%d ell=%d from %d seeds (%s precision)", n, ell, len(seeds), cfg.precision_mode)
    solutions = _finalize(_run_batches(seeds, n, cfg), n, cfg)
    census = build_census(n, ell, solutions, content_filter)

    if cfg.escalate and content_filter is None and census.counts["physical"] < census.rc_count:
        logger.warning(
            "N=%d ell=%d: %d physical solutions for %d rigged configurations, escalating",
            n, ell, census.counts["physical"], census.rc_count,
        )
        denser = cfg.denser()
        extra = _finalize(_run_batches(seed_set(n, ell, denser), n, denser), n, denser)
        census = build_census(n, ell, merge_solutions(list(census.solutions) + extra, cfg.dedup_tol))
    return census


# Polynomials
def _horner(coeffs: Sequence, z):
    value, deriv = 0, 0
    for c in coeffs:
        deriv = deriv * z + value
        value = value * z + c
    return value, deriv


def polynomial_roots(coeffs: Sequence[float]) -> List[complex]:
    """Companion-matrix eigenvalues polished by Newton in mpmath"""
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) < 2 or coeffs[0] == 0:
        raise DegenerateDegreeError(f"need a nonzero leading coefficient and degree >= 1, got {coeffs}")
    degree = len(coeffs) - 1
    companion = np.zeros((degree, degree))
    companion[0, :] = -np.array(coeffs[1:]) / coeffs[0]
    companion[1:, :-1] = np.eye(degree - 1)
    estimates = np.linalg.eigvals(companion)

    roots = []
    with mpmath.workdps(50):
        mp_coeffs = [mpmath.mpf(c) for c in coeffs]
        for estimate in estimates:
            z = mpmath.mpc(estimate)
            for _ in range(100):
                value, deriv = _horner(mp_coeffs, z)
                if deriv == 0:
                    break
                step = value / deriv
                z -= step
                if abs(step) < mpmath.mpf(10) ** -40 * max(1, abs(z)):
                    break
            root = complex(z)
            if abs(root.imag) <= 1e-10 * max(1.0, abs(root)):
                root = complex(root.real, 0.0)
            roots.append(root)
    return sorted(roots, key=lambda z: (z.real, z.imag))


# Reporting
def census_report(census: SectorCensus, use_center_key: bool = False) -> dict:
    """Ordered solution tables per content with completeness and exceptional marks"""
    report = {
        "n": census.n_sites,
        "ell": census.ell,
        "counts": census.counts,
        "rc_count": census.rc_count,
        "completeness": f"{census.counts['physical']}/{census.rc_count}",
        "contents": [],
    }
    if not census.solutions:
        return report
    by_content: Dict[Partition, List[int]] = {}
    for index, sol in enumerate(census.solutions):
        by_content.setdefault(strings.infer_content(sol), []).append(index)
    exceptional = set(census.exceptional)
    for content in sorted(by_content, key=lambda nu: nu.parts, reverse=True):
        ordered = strings.order_indices(census, by_content[content], content, use_center_key)
        rows = []
        for number, index in enumerate(ordered, start=1):
            sol = census.solutions[index]
            dec = strings.decompose(sol, content)
            rc = census.assignment.get(index)
            rows.append(
                {
                    "number": number,
                    "index": index,
                    "star": dec.non_self_conjugate,
                    "classification": sol.classification.value,
                    "exceptional": index in exceptional,
                    "strings": [strings.format_group(g) for g in dec.groups],
                    "rc": None if rc is None else str(rc),
                }
            )
        report["contents"].append({"content": list(content.parts), "solutions": rows})
    return report


def render_report(report: dict) -> str:
    lines = [
        f"N={report['n']} ell={report['ell']}  counts={report['counts']}  completeness {report['completeness']}"
    ]
    for block in report["contents"]:
        lines.append("")
        lines.append("content (" + ",".join(str(p) for p in block["content"]) + ")")
        for row in block["solutions"]:
            label = f"#{row['number']}{'*' if row['star'] else ''}"
            tail = " exceptional" if row["exceptional"] else (f"  {row['rc']}" if row["rc"] else "")
            lines.append(f"{label:>6}  {row['strings'][0]}{tail}")
            for text in row["strings"][1:]:
                lines.append(f"{'':>6}  {text}")
    return "\n".join(lines)
