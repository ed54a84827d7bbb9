from datetime import datetime
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from bethe_rc.config import DEFAULT_EXTENDED_DPS, DEFAULT_PRECISION, DEFAULT_THREADS


# Solver configuration
class SolverConfig(BaseModel):
    """Numerical knobs of the multi-start solver"""

    model_config = ConfigDict(frozen=True)

    newton_tol: float = Field(1e-12, gt=0, examples=[1e-12])
    step_tol: float = Field(1e-10, gt=0)
    max_iters: int = Field(200, gt=0)
    dedup_tol: float = Field(1e-8, gt=0)
    seed_grid: Tuple[float, float, float] = Field((-12.0, 12.0, 0.05), examples=[(-12.0, 12.0, 0.05)])
    phase_points: int = Field(2, ge=1, description="phase grid points per site")
    string_seed_deviations: Tuple[float, ...] = (0.0, 1e-2, -1e-2, 1e-1, -1e-1)
    precision_mode: Literal["standard", "extended"] = DEFAULT_PRECISION
    extended_dps: int = Field(DEFAULT_EXTENDED_DPS, ge=30)
    max_seeds: int = Field(400_000, gt=0)
    rng_seed: int = 0
    random_restarts: int = Field(256, ge=0)
    threads: int = Field(DEFAULT_THREADS, ge=1)
    seed_chunk: int = Field(4096, gt=0)
    escalate: bool = True
    use_center_key: bool = False

    @model_validator(mode="after")
    def check_tolerances(self):
        if not self.dedup_tol > self.newton_tol:
            raise ValueError("dedup_tol must exceed newton_tol")
        low, high, step = self.seed_grid
        if not low < high or not step > 0:
            raise ValueError("seed_grid must be (low, high, step) with low < high and step > 0")
        return self

    @property
    def extended(self) -> bool:
        return self.precision_mode == "extended"

    def denser(self) -> "SolverConfig":
        """Configuration used by the completeness safeguard"""
        low, high, step = self.seed_grid
        return self.model_copy(
            update={
                "seed_grid": (low, high, step / 4),
                "phase_points": self.phase_points * 4,
                "precision_mode": "extended",
                "max_seeds": self.max_seeds * 4,
                "escalate": False,
            }
        )


# Rigged configuration schemas
class RiggedConfigRecord(BaseModel):
    nu: List[int] = Field(..., examples=[[3, 2, 1]])
    riggings: List[int] = Field(..., examples=[[0, 1, 3]])
    vacancy: List[int] = Field(..., examples=[[0, 2, 6]])


# Solution schemas
class SolutionRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(..., examples=[25])
    ell: int = Field(..., examples=[2])
    roots: List[Tuple[float, float]]
    residual: float
    classification: str = Field(..., alias="class", examples=["regular"])
    roots_extended: Optional[List[Tuple[str, str]]] = None


class AssignmentEntry(BaseModel):
    index: int
    roots: List[Tuple[float, float]]
    content: Optional[List[int]] = None
    rc: Optional[RiggedConfigRecord] = None
    exceptional: Optional[bool] = None


class AssignmentDocument(BaseModel):
    n: int
    ell: int
    entries: List[AssignmentEntry]
    exceptional: List[int] = Field(default_factory=list, description="1-based positions in the ordered content list")
    heuristic_contents: List[str] = Field(default_factory=list)
    key_convention_agrees: Optional[bool] = None


# Provenance
class RunManifest(BaseModel):
    command_line: List[str]
    config: Optional[Dict[str, object]] = None
    started_at: datetime
    finished_at: datetime
    version: str
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    output_hashes: Dict[str, str] = Field(default_factory=dict)
    content_sha256: Optional[str] = None


class CensusDocument(BaseModel):
    n: int
    ell: int
    content_filter: Optional[List[int]] = None
    config: SolverConfig
    counts: Dict[str, int]
    rc_count: int
    solutions: List[SolutionRecord]
    manifest: Optional[RunManifest] = None


# Verification
class SolutionResidual(BaseModel):
    index: int
    classification: str
    energy: float
    eigen_residual: float
    passed: bool


class VerificationReport(BaseModel):
    n: int
    ell: int
    passed: bool
    physical_count: int
    rc_count: int
    expected_count: int
    unmatched_energies: List[float] = Field(default_factory=list)
    unmatched_spectrum: List[float] = Field(default_factory=list)
    residuals: List[SolutionResidual] = Field(default_factory=list)
    checks: Dict[str, bool] = Field(default_factory=dict)


class ErrorResponse(BaseModel):
    title: str
    status: int
    detail: str
