from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np


# Identification tolerance of a root with +i/2 or -i/2
SINGULAR_TOL = 1e-8


def canonical_key(z) -> Tuple[float, float]:
    """Sort key: descending real part, then descending imaginary part"""
    return (-round(float(z.real), 9), -float(z.imag))


class Classification(str, Enum):
    """Classification tag of a Bethe solution"""

    REGULAR = "regular"
    PHYSICAL_SINGULAR = "physical_singular"
    UNPHYSICAL_SINGULAR = "unphysical_singular"
    UNVERIFIED = "unverified"

    @property
    def is_singular(self) -> bool:
        return self in (Classification.PHYSICAL_SINGULAR, Classification.UNPHYSICAL_SINGULAR)

    @property
    def is_physical(self) -> bool:
        return self in (Classification.REGULAR, Classification.PHYSICAL_SINGULAR)


# Combinatorial types
@dataclass(frozen=True)
class Partition:
    """Young diagram given by weakly decreasing row lengths"""

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"partition rows must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition rows must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse '3,2,1'; rows are sorted so '1,3,2' is accepted as well"""
        items = [item.strip() for item in text.split(",") if item.strip()]
        return cls(tuple(sorted((int(item) for item in items), reverse=True)))

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def columns(self, k: int) -> int:
        """Number of boxes in the first k columns"""
        return sum(min(k, p) for p in self.parts)

    def distinct_rows(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.parts), reverse=True))

    def multiplicity(self, k: int) -> int:
        return self.parts.count(k)

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class SectorShape:
    """Site spins times two; the spin-1/2 chain is N copies of 1"""

    mu: Tuple[int, ...]

    def __post_init__(self):
        mu = tuple(int(m) for m in self.mu)
        if not mu or any(m < 1 for m in mu):
            raise ValueError(f"shape entries must be positive: {mu}")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def spin_half(cls, n_sites: int) -> "SectorShape":
        return cls((1,) * n_sites)

    @property
    def n_sites(self) -> int:
        return len(self.mu)

    @property
    def is_spin_half(self) -> bool:
        return all(m == 1 for m in self.mu)


@dataclass(frozen=True)
class RiggedConfiguration:
    """Partition plus one rigging per row, equal rows with weakly decreasing riggings"""

    nu: Partition
    riggings: Tuple[int, ...]

    def __post_init__(self):
        riggings = tuple(int(r) for r in self.riggings)
        if len(riggings) != self.nu.length:
            raise ValueError("one rigging per row is required")
        for i in range(1, len(riggings)):
            if self.nu.parts[i] == self.nu.parts[i - 1] and riggings[i] > riggings[i - 1]:
                raise ValueError(f"riggings of equal rows must be weakly decreasing: {riggings}")
        object.__setattr__(self, "riggings", riggings)

    @classmethod
    def canonical(cls, nu: Partition, riggings: Sequence[int]) -> "RiggedConfiguration":
        """Build from riggings in any order within blocks of equal rows"""
        rows = sorted(zip(nu.parts, riggings), key=lambda row: (-row[0], -row[1]))
        return cls(nu, tuple(r for _, r in rows))

    def rows(self):
        return list(zip(self.nu.parts, self.riggings))

    def __str__(self) -> str:
        return "{" + ",".join(f"({p},{r})" for p, r in self.rows()) + "}"


# Bethe solutions
@dataclass(frozen=True)
class BetheSolution:
    """Multiset of rapidities of the sector (N, ell), kept in canonical order.

    ``precise`` optionally holds the same roots as mpmath numbers when the
    solution was polished in extended precision.
    """

    n_sites: int
    roots: Tuple[complex, ...]
    residual_norm: float = 0.0
    classification: Classification = Classification.UNVERIFIED
    precise: Optional[tuple] = None

    def __post_init__(self):
        roots = tuple(complex(z) for z in self.roots)
        if not roots:
            raise ValueError("a Bethe solution needs at least one root")
        if not all(cmath.isfinite(z) for z in roots):
            raise ValueError(f"non-finite root in {roots}")
        order = sorted(range(len(roots)), key=lambda i: canonical_key(roots[i]))
        object.__setattr__(self, "roots", tuple(roots[i] for i in order))
        if self.precise is not None:
            if len(self.precise) != len(roots):
                raise ValueError("precise roots do not match roots")
            object.__setattr__(self, "precise", tuple(self.precise[i] for i in order))
        object.__setattr__(self, "classification", Classification(self.classification))

    @property
    def ell(self) -> int:
        return len(self.roots)

    def values(self, dps: Optional[int] = None) -> tuple:
        """Roots in the requested arithmetic (binary64 when dps is None)"""
        if dps is None:
            return self.roots
        import mpmath

        source = self.precise if self.precise is not None else self.roots
        return tuple(mpmath.mpc(z) for z in source)

    def negated(self) -> "BetheSolution":
        precise = None if self.precise is None else tuple(-z for z in self.precise)
        return BetheSolution(
            self.n_sites, tuple(-z for z in self.roots), self.residual_norm, self.classification, precise
        )

    def is_real(self, tol: float = SINGULAR_TOL) -> bool:
        return all(abs(z.imag) < tol for z in self.roots)

    def distance(self, other: "BetheSolution") -> float:
        """Max componentwise distance after canonical ordering"""
        if self.ell != other.ell:
            return math.inf
        return max(abs(a - b) for a, b in zip(self.roots, other.roots))


@dataclass(frozen=True)
class SingularRegularization:
    """Regularization lambda_1 = i/2 + eps + c eps^N, lambda_2 = -i/2 + eps"""

    epsilon: float
    c: complex

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not cmath.isfinite(complex(self.c)):
            raise ValueError("regularization constant must be finite")


# Strings
@dataclass(frozen=True)
class StringGroup:
    length: int
    center: float
    members: Tuple[complex, ...]
    deviation: float
    self_conjugate: bool

    def __post_init__(self):
        if len(self.members) != self.length:
            raise ValueError("string length does not match its members")


@dataclass(frozen=True)
class StringDecomposition:
    groups: Tuple[StringGroup, ...]
    content: Partition
    non_self_conjugate: bool

    @property
    def max_deviation(self) -> float:
        return max((g.deviation for g in self.groups), default=0.0)

    @property
    def total_deviation(self) -> float:
        return sum(g.deviation for g in self.groups)


@dataclass(frozen=True)
class RiggingAssignment:
    """Census index to rigged configuration, plus the indices left outside"""

    mapping: Dict[int, RiggedConfiguration] = field(default_factory=dict)
    exceptional: Tuple[int, ...] = ()
    scheme: str = "none"
    heuristic: bool = False


@dataclass(frozen=True)
class SectorCensus:
    """Deduplicated solution set of a sector"""

    n_sites: int
    ell: int
    solutions: Tuple[BetheSolution, ...]
    rc_count: int
    assignment: Dict[int, RiggedConfiguration] = field(default_factory=dict)
    exceptional: Tuple[int, ...] = ()
    content_filter: Optional[Partition] = None
    heuristic_contents: Tuple[str, ...] = ()

    @property
    def counts(self) -> Dict[str, int]:
        real = sum(1 for s in self.solutions if s.is_real())
        singular = sum(1 for s in self.solutions if s.classification.is_singular)
        physical = sum(1 for s in self.solutions if s.classification.is_physical)
        return {
            "real": real,
            "complex": len(self.solutions) - real,
            "singular": singular,
            "physical": physical,
        }

    @property
    def completeness(self) -> float:
        if self.rc_count == 0:
            return 1.0
        return self.counts["physical"] / self.rc_count


# Oracle values
@dataclass(frozen=True)
class SpectrumRecord:
    n_sites: int
    ell: int
    eigenvalues: Tuple[float, ...]
    highest_weight_energies: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense vector on (C^2)^N; site 1 is the most significant bit, spin up is 0.

    Amplitudes are complex128, or an object array of mpmath numbers in
    extended precision.
    """

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2**self.n_sites,):
            raise ValueError(f"expected {2 ** self.n_sites} amplitudes, got {self.amplitudes.shape}")

    @property
    def is_extended(self) -> bool:
        return self.amplitudes.dtype == object

    def norm(self):
        if self.is_extended:
            import mpmath

            return mpmath.sqrt(mpmath.fsum(abs(a) ** 2 for a in self.amplitudes))
        return float(np.linalg.norm(self.amplitudes))

    def as_complex(self) -> np.ndarray:
        if self.is_extended:
            return np.array([complex(a) for a in self.amplitudes], dtype=complex)
        return self.amplitudes

    def down_spin_counts(self, tol: float = 0.0) -> set:
        """Numbers of down spins carried by the nonzero amplitudes"""
        counts = set()
        scale = self.norm()
        for index, amplitude in enumerate(self.amplitudes):
            if abs(amplitude) > tol * scale and amplitude != 0:
                counts.add(bin(index).count("1"))
        return counts
