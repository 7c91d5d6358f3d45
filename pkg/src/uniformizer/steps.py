"""Inductive construction of partitions uniform relative to K

Each step builds a long K-standard tower, splits it into columns of constant
name, compares every column's centred block distribution with the exact
reference, and repairs the bad columns: INITIAL mode renames them to the
infinite atom, REFINING mode copies the name of a good column with the same
coarse name.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Optional

from loguru import logger

from src.config.settings import settings
from src.errors import (
    BudgetExhausted,
    DegeneratePartition,
    MissingNames,
    NeedsDeeperStage,
    NotRefining,
    PreconditionError,
)
from src.models.enums import DonorPolicy, UniformizeMode
from src.partitions.blocks import count_blocks, distribution_within
from src.partitions.names import reference_distribution
from src.partitions.partition import Partition, partition_distance, refines_with_same_support
from src.rankone.spec import RankOneSpec
from src.rankone.stage import build_stage
from src.sets.intervals import IntervalSet
from src.stats.birkhoff import UniformityVerdict, partition_uniformity_test
from src.symbolic.subshift import FactorMapTable, factor_table
from src.towers.surgery import build_K_standard, refine_according_to, refine_K_standard, unite_into_infinite_level
from src.towers.tower import Column, StandardTower
from src.uniformizer.params import UniformizerParams, default_params


@dataclass(frozen=True)
class ColumnAudit:
    column: int
    anchors: int
    deviation: Optional[Fraction]
    bad: bool


def audit_columns(t: StandardTower, n: int, delta: Fraction, ref: dict) -> list[ColumnAudit]:
    """Centred (2n-1)-block check of every column against `ref`"""
    audits = []
    for ci, col in enumerate(t.columns):
        if col.level_names is None:
            raise MissingNames(f"Column {ci} carries no names; refine the tower first", column=ci)
        padded = col.padded_names()
        core = range(len(col.prefix_names), len(col.prefix_names) + col.height)
        dist = count_blocks(padded, n, core)
        if dist.anchor_count == 0:
            audits.append(ColumnAudit(ci, 0, None, True))
            continue
        check = distribution_within(dist, ref, delta)
        audits.append(ColumnAudit(ci, dist.anchor_count, check.max_deviation, not check.within))
    return audits


def detect_bad_columns(t: StandardTower, alpha: Partition, n: int, delta: Fraction, ref: dict) -> set[int]:
    """Columns whose fiber distribution is not strictly within δ of `ref`"""
    return {a.column for a in audit_columns(t, n, Fraction(delta), ref) if a.bad}


def _finite_mass(col: Column) -> Fraction:
    return sum(1 for s in col.level_names if s != 1) * col.base_measure


def rename_bad_to_one(spec: RankOneSpec, t: StandardTower, alpha: Partition, bad: set[int]) -> tuple[Partition, StandardTower]:
    """Move every level of the bad columns to atom 1 and unite them with the infinite level"""
    if not bad:
        return alpha, t
    if len(bad) >= len(t.columns):
        raise DegeneratePartition("Every column is bad; renaming would empty the partition")
    removed = IntervalSet.union_all(s for ci in bad for s in t.columns[ci].level_sets)
    atoms = []
    for i, atom in enumerate(alpha.finite_atoms, start=2):
        remaining = atom - removed
        if remaining.is_empty:
            raise DegeneratePartition(f"Atom {i} would vanish after renaming", atom=i)
        atoms.append(remaining)
    renamed = Partition(tuple(atoms), alpha.labels, alpha.unresolved)
    logger.debug(f"Renamed {len(bad)} bad columns to atom 1, moved mass {alpha.K.measure() - renamed.K.measure()}")
    return renamed, unite_into_infinite_level(t, bad)


@dataclass(frozen=True)
class CopyOutcome:
    partition: Partition
    moved_mass: Fraction
    r_columns: tuple[int, ...]


def _coarse_name(col: Column, table: FactorMapTable) -> tuple:
    return tuple(table(s) for s in col.level_names)


def copy_good_names(
    spec: RankOneSpec,
    t: StandardTower,
    alpha: Partition,
    beta: Partition,
    bad: set[int],
    donor_policy: DonorPolicy = DonorPolicy.LARGEST,
) -> CopyOutcome:
    """Overwrite each bad column's α-name with a good column's of equal height and β-name

    Among the good columns matching a bad one, `DonorPolicy.LARGEST` picks the
    largest base measure (lowest index on ties) and `DonorPolicy.FIRST` the
    lowest index. Columns without a donor are kept as R-columns.
    """
    if not bad:
        return CopyOutcome(alpha, Fraction(0), ())
    donor_policy = DonorPolicy(donor_policy)
    table = factor_table(alpha, beta)
    donors: dict[tuple, int] = {}
    for ci, col in enumerate(t.columns):
        if ci in bad:
            continue
        key = (col.height, _coarse_name(col, table))
        best = donors.get(key)
        if best is None:
            donors[key] = ci
        elif donor_policy is DonorPolicy.LARGEST and col.base_measure > t.columns[best].base_measure:
            donors[key] = ci

    gains: dict[int, list[IntervalSet]] = {}
    losses: dict[int, list[IntervalSet]] = {}
    moved = Fraction(0)
    r_columns = []
    for ci in sorted(bad):
        col = t.columns[ci]
        donor = donors.get((col.height, _coarse_name(col, table)))
        if donor is None:
            r_columns.append(ci)
            continue
        for level, old, new in zip(col.level_sets, col.level_names, t.columns[donor].level_names):
            if old == new:
                continue
            losses.setdefault(old, []).append(level)
            gains.setdefault(new, []).append(level)
            moved += level.measure()

    atoms = []
    for i, atom in enumerate(alpha.finite_atoms, start=2):
        updated = (atom - IntervalSet.union_all(losses.get(i, []))) | IntervalSet.union_all(gains.get(i, []))
        if updated.is_empty:
            raise DegeneratePartition(f"Atom {i} would vanish after copying names", atom=i)
        atoms.append(updated)
    copied = Partition(tuple(atoms), alpha.labels, alpha.unresolved)
    if r_columns:
        logger.debug(f"{len(r_columns)} bad columns have no donor and stay as R-columns")
    return CopyOutcome(copied, moved, tuple(r_columns))


@dataclass
class StepLog:
    """Record of one uniformizer step"""

    step: int
    d_increment: Fraction
    bad_mass: Fraction
    tolerance: Fraction
    floor: int
    escalations: int
    columns: int
    bad_columns: int
    r_mass: Fraction = Fraction(0)
    n_hat: int = 1
    m_n: Optional[int] = None
    M_n: Optional[int] = None
    separated: Optional[bool] = None
    certified_target: Optional[Fraction] = None

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "d_increment": str(self.d_increment),
            "bad_mass": str(self.bad_mass),
            "tolerance": str(self.tolerance),
            "floor": self.floor,
            "escalations": self.escalations,
            "columns": self.columns,
            "bad_columns": self.bad_columns,
            "r_mass": str(self.r_mass),
            "n_hat": self.n_hat,
            "m_n": self.m_n,
            "M_n": self.M_n,
            "separated": self.separated,
            "certified_target": None if self.certified_target is None else str(self.certified_target),
        }


def _hit_bounds(t: StandardTower, K: IntervalSet) -> tuple[Optional[int], Optional[int]]:
    hits = [sum(1 for s in c.level_sets if s.issubset(K)) for c in t.columns]
    return (min(hits), max(hits)) if hits else (None, None)


def uniformize_step(
    spec: RankOneSpec,
    alpha_prev: Partition,
    params: UniformizerParams,
    n: int,
    depth: int,
    mode: UniformizeMode = UniformizeMode.INITIAL,
    beta: Optional[Partition] = None,
    previous: Optional[StandardTower] = None,
    previous_M: Optional[int] = None,
    donor_policy: DonorPolicy = DonorPolicy.LARGEST,
) -> tuple[Partition, StepLog, StandardTower]:
    """One step: returns α_n, its log and the retained tower for the next step"""
    delta = params.delta(n)
    if delta == 0:
        raise DegeneratePartition("Zero tolerance leaves no good column")
    if mode is UniformizeMode.REFINING and beta is None:
        raise PreconditionError("REFINING mode needs the coarser partition β")
    K = alpha_prev.K
    column_height = build_stage(spec, depth).height

    for escalation in range(params.max_escalations + 1):
        floor = params.escalated_floor(n, escalation)
        if floor > column_height:
            raise BudgetExhausted(
                f"Step {n} needs floor {floor}, above the stage-{depth} column height {column_height}",
                depth_limited=True,
                step=n,
                floor=floor,
                depth=depth,
            )
        try:
            if escalation == 0:
                ref = reference_distribution(spec, alpha_prev, n, depth, K)
            if previous is None:
                tower = build_K_standard(spec, K, floor, depth)
            else:
                tower = refine_K_standard(spec, previous, K, floor, depth)
            tower = refine_according_to(spec, tower, alpha_prev, depth, margin=n - 1)
        except NeedsDeeperStage as e:
            raise BudgetExhausted(
                f"Step {n} at floor {floor} does not fit the stage-{depth} column: {e.message}",
                depth_limited=True,
                step=n,
                floor=floor,
                depth=depth,
            ) from e
        audits = audit_columns(tower, n, delta, ref)
        bad = {a.column for a in audits if a.bad}
        bad_mass = sum((_finite_mass(tower.columns[ci]) for ci in bad), Fraction(0))
        n_hat = 1 + max((a.anchors for a in audits if a.bad), default=0)

        if mode is UniformizeMode.INITIAL:
            if len(bad) < len(tower.columns) and bad_mass < delta:
                alpha_n, retained = rename_bad_to_one(spec, tower, alpha_prev, bad)
                increment, r_mass = bad_mass, Fraction(0)
                break
        else:
            outcome = copy_good_names(spec, tower, alpha_prev, beta, bad, donor_policy)
            increment = 2 * outcome.moved_mass
            if increment < delta:
                alpha_n, retained = outcome.partition, tower
                r_mass = sum((tower.columns[ci].mass for ci in outcome.r_columns), Fraction(0))
                break
        logger.info(
            f"Step {n}: {len(bad)}/{len(tower.columns)} bad columns at floor {floor}, "
            f"bad mass {bad_mass} not below {delta}; escalating"
        )
    else:
        raise BudgetExhausted(
            f"Step {n} found no tower floor with d-increment below {delta}",
            step=n,
            escalations=params.max_escalations,
        )

    d_actual = partition_distance(alpha_prev, alpha_n).as_fraction()
    if mode is UniformizeMode.REFINING and not refines_with_same_support(alpha_n, beta):
        raise NotRefining(f"Step {n} broke α ≽ β")
    m_n, M_n = _hit_bounds(retained, alpha_n.K)
    log = StepLog(
        step=n,
        d_increment=d_actual,
        bad_mass=bad_mass,
        tolerance=delta,
        floor=floor,
        escalations=escalation,
        columns=len(tower.columns),
        bad_columns=len(bad),
        r_mass=r_mass,
        n_hat=n_hat,
        m_n=m_n,
        M_n=M_n,
        separated=None if previous_M is None or m_n is None else m_n > previous_M,
        certified_target=params.certified_target(n),
    )
    logger.info(f"Step {n} done: d={d_actual}, bad columns {len(bad)}, floor {floor}")
    return alpha_n, log, retained


@dataclass
class UniformizeResult:
    partition: Partition
    logs: list[StepLog]
    uniformity: dict[tuple[int, Hashable], UniformityVerdict] = field(default_factory=dict)
    hit_growth: Optional[bool] = None
    ledger: list[Fraction] = field(default_factory=list)
    total_distance: Fraction = Fraction(0)
    depth: Optional[int] = None

    @property
    def total_increment(self) -> Fraction:
        return sum((log.d_increment for log in self.logs), Fraction(0))


def _run_steps(
    spec: RankOneSpec,
    alpha0: Partition,
    params: UniformizerParams,
    steps: int,
    mode: UniformizeMode,
    beta: Optional[Partition],
    depth: int,
    donor_policy: DonorPolicy,
) -> tuple[Partition, list[StepLog]]:
    alpha = alpha0
    logs: list[StepLog] = []
    tower: Optional[StandardTower] = None
    previous_M: Optional[int] = None
    for n in range(1, steps + 1):
        K_before = alpha.K
        try:
            alpha, log, tower = uniformize_step(
                spec, alpha, params, n, depth, mode, beta, tower, previous_M, donor_policy
            )
        except BudgetExhausted as e:
            e.logs = list(logs)
            raise
        if not alpha.K.issubset(K_before):
            raise DegeneratePartition(f"K grew at step {n}")
        logs.append(log)
        previous_M = log.M_n
    return alpha, logs


def uniformize(
    spec: RankOneSpec,
    alpha0: Partition,
    epsilon,
    steps: int,
    mode: UniformizeMode = UniformizeMode.INITIAL,
    beta: Optional[Partition] = None,
    depth: int = 8,
    params: Optional[UniformizerParams] = None,
    audit_n_max: int = 1,
    audit_epsilon: Optional[Fraction] = None,
    donor_policy: DonorPolicy = DonorPolicy.LARGEST,
) -> UniformizeResult:
    """Run `steps` steps from α0 with total d-budget ε

    When a step's tower no longer fits the stage column, the run restarts
    one stage deeper, up to `settings.max_depth`. Any other stop raises
    BudgetExhausted with the finished StepLogs attached.
    """
    params = params or default_params(epsilon, alpha0)
    if steps < 0:
        raise PreconditionError("steps must be nonnegative")
    if mode is UniformizeMode.REFINING:
        if beta is None or not refines_with_same_support(alpha0, beta):
            raise PreconditionError("REFINING mode needs α0 ≽ β with K_α0 = K_β")
        verdicts = partition_uniformity_test(spec, beta, beta.K, 1, params.epsilon, depth)
        if not all(v.uniform for v in verdicts.values()):
            raise PreconditionError("β failed its uniformity test")

    deepest = min(settings.max_depth, spec.max_stage)
    run_depth = depth
    while True:
        try:
            alpha, logs = _run_steps(spec, alpha0, params, steps, mode, beta, run_depth, donor_policy)
            break
        except BudgetExhausted as e:
            if not e.depth_limited or run_depth >= deepest:
                raise
            run_depth += 1
            logger.warning(f"{e.message}; restarting the run at depth {run_depth}")

    ledger: list[Fraction] = []
    for log in logs:
        ledger.append((ledger[-1] if ledger else Fraction(0)) + log.d_increment)
    total_distance = partition_distance(alpha0, alpha).as_fraction()
    if ledger and ledger[-1] >= params.epsilon:
        raise BudgetExhausted(f"d-increments sum to {ledger[-1]}, not below {params.epsilon}", logs=logs)
    hit_growth = None
    if mode is UniformizeMode.INITIAL and len(logs) > 1:
        mins = [log.m_n for log in logs if log.m_n is not None]
        hit_growth = all(a < b for a, b in zip(mins, mins[1:]))
    uniformity = partition_uniformity_test(
        spec, alpha, alpha.K, audit_n_max, audit_epsilon or params.epsilon, run_depth
    )
    logger.info(
        f"Uniformized over {steps} steps at depth {run_depth}: "
        f"Σd = {ledger[-1] if ledger else 0}, d(α0, α) = {total_distance}"
    )
    return UniformizeResult(alpha, logs, uniformity, hit_growth, ledger, total_distance, run_depth)
