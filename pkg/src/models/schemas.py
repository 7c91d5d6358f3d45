"""Pydantic schemas for experiment configs and serialized reports"""

import hashlib
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from src.models.enums import CommandName, OrbitRegime, UniformizeMode


def _rational_text(value: Any) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    return str(value)


# Exact rationals travel as "p/q" strings
RationalText = Annotated[Optional[str], BeforeValidator(_rational_text)]


# Config Schemas
class ExperimentConfig(BaseModel):
    """Everything that determines a run; identical configs give identical artifacts"""

    command: CommandName
    preset: Optional[str] = None
    spec_file: Optional[str] = None
    depth: int
    params: Dict[str, Any] = Field(default_factory=dict)
    out_dir: str

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form"""
        canonical = self.model_dump_json(exclude={"out_dir"})
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ReportMeta(BaseModel):
    """Provenance embedded in every report"""

    tool: str
    version: str
    command: CommandName
    config_hash: str


class Report(BaseModel):
    meta: ReportMeta
    result: Dict[str, Any]


# Tower Schemas
class ColumnSummary(BaseModel):
    index: int
    height: int
    base_measure: RationalText
    k_levels: int


class TowerSummary(BaseModel):
    """Shape of a tower with its K-standard check"""

    columns: List[ColumnSummary]
    heights: List[int]
    principal_mass: RationalText
    unresolved_mass: RationalText
    k_standard: bool
    straddling: List[List[int]] = []
    columns_without_K: List[int] = []


# Statistics Schemas
class RatioRowSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    point: RationalText
    horizon: int
    hit_count: int
    c_count: int
    ratio: RationalText = None
    deviation: RationalText = None


class UniformityVerdictSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    epsilon: RationalText
    m_found: Optional[int] = None
    witnesses: List[List[RationalText]] = []
    sample_count: int
    horizons: List[int]
    max_deviation: RationalText


class OrbitVerdictSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    regime: OrbitRegime
    horizon: int
    count_at_horizon: int
    count_before: int
    low_confidence: bool


class CriteriaResultSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    label: str
    m_found: Optional[int] = None
    c_estimate: RationalText = None
    tail_stable: bool
    limits_agree: bool
    exact_ratio: RationalText = None
    max_error: RationalText = None
    exact_ok: Optional[bool] = None
    minimal: Optional[bool] = None
    shift_pairs: int
    shift_violations: int
    bound_pairs: int
    bound_violations: int
    consistent: bool


# Uniformizer Schemas
class StepLogSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    step: int
    d_increment: RationalText
    bad_mass: RationalText
    tolerance: RationalText
    floor: int
    escalations: int
    columns: int
    bad_columns: int
    r_mass: RationalText
    n_hat: int
    m_n: Optional[int] = None
    M_n: Optional[int] = None
    separated: Optional[bool] = None
    certified_target: RationalText = None


class UniformizeSummary(BaseModel):
    mode: UniformizeMode
    epsilon: RationalText
    steps: List[StepLogSchema]
    ledger: List[RationalText]
    total_distance: RationalText
    hit_growth: Optional[bool] = None
    depth: Optional[int] = None
    uniform_atoms: int
    non_uniform_atoms: List[str] = []
