"""Birkhoff sums, Hopf ratio scans and uniformity tests relative to K

All quantities are exact: T_N f(y) = Σ_{i=-N}^{N-1} f(T^i y) is read off the
stage column, ratios are Fractions and deviations are compared against a
rational ε without tolerance.
"""

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Optional, Sequence

from loguru import logger

from src.config.settings import settings
from src.errors import NeedsDeeperStage, PreconditionError, TowerNotRefinedByK, UnresolvedMass
from src.partitions.names import iterated_join
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec
from src.rankone.stage import StageTower, build_stage
from src.sets.intervals import IntervalSet, MeasureValue, Rational
from src.towers.tower import StandardTower


@dataclass(frozen=True)
class LevelProfile:
    """Membership of a set along the stage column

    Levels inside the set are counted through prefix sums; only the levels
    the set cuts partially need a point test.
    """

    stage: StageTower
    target: IntervalSet
    prefix: tuple[int, ...]
    partial: tuple[int, ...]

    @classmethod
    def of(cls, stage: StageTower, target: IntervalSet) -> "LevelProfile":
        full = [0]
        partial = []
        for j, level in enumerate(stage.levels):
            inside = level.issubset(target)
            full.append(full[-1] + int(inside))
            if not inside and level.intersects(target):
                partial.append(j)
        return cls(stage, target, tuple(full), tuple(partial))

    def count(self, offset: Fraction, lo: int, hi: int) -> int:
        """Hits of the set on levels lo..hi-1 at the given offset"""
        hits = self.prefix[hi] - self.prefix[lo]
        i = bisect_left(self.partial, lo)
        while i < len(self.partial) and self.partial[i] < hi:
            if self.target.contains(self.stage.starts[self.partial[i]] + offset):
                hits += 1
            i += 1
        return hits


@lru_cache(maxsize=128)
def level_profile(spec: RankOneSpec, target: IntervalSet, depth: int) -> LevelProfile:
    return LevelProfile.of(build_stage(spec, depth), target)


def birkhoff_sum(spec: RankOneSpec, f_set: IntervalSet, y: Rational, N: int, depth: int) -> int:
    """#{i ∈ [-N, N-1] : T^i y ∈ f_set}"""
    if N < 0:
        raise PreconditionError(f"Horizon must be nonnegative, got {N}")
    if N == 0 or f_set.is_empty:
        return 0
    profile = level_profile(spec, f_set, depth)
    j, offset = profile.stage.require(y)
    if j - N < 0:
        raise NeedsDeeperStage(f"T^-{N} of {y} is below the stage-{depth} base", index=-N)
    if j + N > profile.stage.height:
        raise NeedsDeeperStage(f"T^{N - 1} of {y} is above the stage-{depth} top", index=N - 1)
    return profile.count(offset, j - N, j + N)


def _van_der_corput(i: int) -> Fraction:
    value, denom = Fraction(0), 1
    while i:
        denom *= 2
        i, bit = divmod(i, 2)
        value += Fraction(bit, denom)
    return value


def sample_points(K: IntervalSet, count: Optional[int] = None, tower: Optional[StandardTower] = None) -> list[Fraction]:
    """Deterministic low-discrepancy points of K, plus column-base midpoints of `tower`"""
    count = settings.sample_count if count is None else count
    mass = K.measure()
    if mass == 0:
        raise PreconditionError("Cannot sample from a null set")
    points = [K.point_at(_van_der_corput(i + 1) * mass) for i in range(count)]
    if tower is not None:
        for col in tower.columns:
            mid = col.base.point_at(col.base_measure / 2)
            if K.contains(mid):
                points.append(mid)
    return sorted(set(points))


def horizon_ladder(limit: int) -> list[int]:
    """Powers of two below `limit`, then `limit` itself"""
    ladder = []
    N = 1
    while N < limit:
        ladder.append(N)
        N *= 2
    if limit >= 1:
        ladder.append(limit)
    return ladder


@dataclass(frozen=True)
class RatioRow:
    point: Fraction
    horizon: int
    hit_count: int
    c_count: int
    ratio: Optional[Fraction]
    deviation: Optional[Fraction]


@dataclass(frozen=True)
class RatioReport:
    """Exact (T_N 1_C)/(T_N 1_K) table over sample points and horizons"""

    sample_points: tuple[Fraction, ...]
    horizons: tuple[int, ...]
    target: Fraction
    rows: tuple[RatioRow, ...]
    unresolved: tuple[tuple[Fraction, int], ...] = ()

    @property
    def max_deviation(self) -> dict[int, Fraction]:
        """Largest deviation per horizon over rows with at least one K hit"""
        out: dict[int, Fraction] = {}
        for row in self.rows:
            if row.deviation is not None:
                out[row.horizon] = max(out.get(row.horizon, Fraction(0)), row.deviation)
        return dict(sorted(out.items()))

    def final_rows(self) -> list[RatioRow]:
        """Each point's row at its largest resolved horizon"""
        last: dict[Fraction, RatioRow] = {}
        for row in self.rows:
            if row.point not in last or row.horizon > last[row.point].horizon:
                last[row.point] = row
        return [last[p] for p in sorted(last)]

    def fraction_within(self, epsilon: Rational) -> Fraction:
        final = [r for r in self.final_rows() if r.deviation is not None]
        if not final:
            return Fraction(0)
        return Fraction(sum(1 for r in final if r.deviation <= epsilon), len(final))


def hopf_ratio_scan(
    spec: RankOneSpec,
    C: IntervalSet,
    K: IntervalSet,
    samples: Sequence[Rational],
    horizons: Optional[Sequence[int]],
    depth: int,
) -> RatioReport:
    """Ratio table with target ν(C)/ν(K)

    Without explicit horizons each point uses the ladder up to its feasible
    horizon. Unresolvable (point, N) pairs are listed, not raised.
    """
    mass_k = K.measure()
    if mass_k == 0:
        raise PreconditionError("K must have positive measure")
    target = C.measure() / mass_k
    stage = build_stage(spec, depth)
    profile_k = level_profile(spec, K, depth)
    profile_c = level_profile(spec, C, depth) if C else None

    rows = []
    unresolved = []
    used: set[int] = set()
    for y in sorted(Fraction(s) for s in samples):
        loc = stage.locate(y)
        if loc is None:
            unresolved.append((y, 0))
            continue
        j, offset = loc
        limit = min(j, stage.height - j)
        for N in horizons if horizons is not None else horizon_ladder(limit):
            if N > limit:
                unresolved.append((y, N))
                continue
            hits = profile_k.count(offset, j - N, j + N)
            c_hits = profile_c.count(offset, j - N, j + N) if profile_c else 0
            ratio = Fraction(c_hits, hits) if hits else None
            rows.append(RatioRow(y, N, hits, c_hits, ratio, None if ratio is None else abs(ratio - target)))
            used.add(N)
    if unresolved:
        logger.debug(f"{len(unresolved)} (point, horizon) pairs need a deeper stage than {depth}")
    rows.sort(key=lambda r: (r.point, r.horizon))
    return RatioReport(
        tuple(sorted({Fraction(s) for s in samples})),
        tuple(sorted(used)),
        target,
        tuple(rows),
        tuple(unresolved),
    )


@dataclass(frozen=True)
class UniformityVerdict:
    """Smallest tested m after which all sampled ratios are within ε, or None"""

    epsilon: Fraction
    m_found: Optional[int]
    witnesses: tuple[tuple[Fraction, int, Fraction], ...] = ()
    sample_count: int = 0
    horizons: tuple[int, ...] = ()
    max_deviation: Fraction = Fraction(0)

    @property
    def uniform(self) -> bool:
        return self.m_found is not None


def verdict_from_report(report: RatioReport, epsilon: Rational, m_schedule: Sequence[int]) -> UniformityVerdict:
    epsilon = Fraction(epsilon)
    rated = [r for r in report.rows if r.deviation is not None]
    worst = max((r.deviation for r in rated), default=Fraction(0))
    witnesses: list[RatioRow] = []
    for m in sorted(m_schedule):
        considered = [r for r in rated if r.hit_count >= m]
        if not considered:
            break
        witnesses = [r for r in considered if r.deviation >= epsilon]
        if not witnesses:
            return UniformityVerdict(epsilon, m, (), len(report.sample_points), report.horizons, worst)
    return UniformityVerdict(
        epsilon,
        None,
        tuple((r.point, r.horizon, r.deviation) for r in witnesses),
        len(report.sample_points),
        report.horizons,
        worst,
    )


def uniformity_test(
    spec: RankOneSpec,
    C: IntervalSet,
    K: IntervalSet,
    epsilon: Rational,
    m_schedule: Optional[Sequence[int]] = None,
    samples: Optional[Sequence[Rational]] = None,
    depth: Optional[int] = None,
    horizons: Optional[Sequence[int]] = None,
) -> UniformityVerdict:
    """Uniformity of C relative to K at the tested samples and horizons"""
    depth = settings.default_depth if depth is None else depth
    m_schedule = settings.m_schedule if m_schedule is None else m_schedule
    samples = sample_points(K) if samples is None else samples
    if any(not K.contains(y) for y in samples):
        raise PreconditionError("Sample points must lie in K")
    report = hopf_ratio_scan(spec, C, K, samples, horizons, depth)
    verdict = verdict_from_report(report, epsilon, m_schedule)
    logger.debug(f"Uniformity of {C} relative to {K}: m={verdict.m_found}, max deviation {verdict.max_deviation}")
    return verdict


def partition_uniformity_test(
    spec: RankOneSpec,
    alpha: Partition,
    K: Optional[IntervalSet],
    n_max: int,
    epsilon: Rational,
    depth: int,
    samples: Optional[Sequence[Rational]] = None,
    m_schedule: Optional[Sequence[int]] = None,
) -> dict[tuple[int, Hashable], UniformityVerdict]:
    """Verdicts for every finite atom of α_{-n}^{n-1}, n = 0..n_max

    Keys are (n, label): label is the atom index for n = 0, its word otherwise.
    Join atoms miss the cells whose window leaves the stage column, so for
    n >= 1 both the hit counts and the target are taken relative to K minus
    those unresolved cells, and only samples inside it are scanned.
    """
    K = alpha.K if K is None else K
    samples = sample_points(K) if samples is None else samples
    verdicts: dict[tuple[int, Hashable], UniformityVerdict] = {}
    for i, atom in enumerate(alpha.finite_atoms, start=2):
        verdicts[(0, i)] = uniformity_test(spec, atom, K, epsilon, m_schedule, samples, depth)
    for n in range(1, n_max + 1):
        joined = iterated_join(spec, alpha, -n, n - 1, depth)
        resolved = K - joined.unresolved
        if resolved.measure() == 0:
            raise UnresolvedMass(f"No point of K has a resolved window of radius {n} at depth {depth}", n=n)
        inside = [y for y in samples if resolved.contains(y)] or sample_points(resolved)
        logger.debug(f"Join level {n}: clipped {K.measure() - resolved.measure()} of K, {len(inside)} samples left")
        for label, atom in zip(joined.labels, joined.finite_atoms):
            verdicts[(n, label)] = uniformity_test(spec, atom, resolved, epsilon, m_schedule, inside, depth)
    failing = sum(1 for v in verdicts.values() if not v.uniform)
    logger.info(f"Partition uniformity: {len(verdicts)} atoms tested, {failing} without a threshold")
    return verdicts


def fiber_hit_coverage(t: StandardTower, K: IntervalSet, n: int) -> MeasureValue:
    """ν of K covered by fibers hitting K at least n times"""
    covered = Fraction(0)
    for ci, col in enumerate(t.columns):
        hits = 0
        for li, level in enumerate(col.level_sets):
            if level.issubset(K):
                hits += 1
            elif level.intersects(K):
                raise TowerNotRefinedByK(f"Level {li} of column {ci} straddles K", column=ci, level=li)
        if hits >= n:
            covered += hits * col.base_measure
    return MeasureValue(covered)
