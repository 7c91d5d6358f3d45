"""Shift-orbit walks, ratio-limit Radon estimates and the existence criteria"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Hashable, Optional, Sequence

from loguru import logger

from src.config.settings import settings
from src.errors import BoundedOrbitDetected, MalformedInput, PreconditionError, WindowOutOfRange
from src.models.enums import OrbitRegime
from src.partitions.names import column_names
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec
from src.rankone.stage import build_stage
from src.sets.intervals import Rational

Symbol = Hashable


@dataclass(frozen=True)
class Walk:
    """A window of a shift orbit: symbols[k] is coordinate offset + k"""

    symbols: tuple[Symbol, ...]
    offset: int = 0

    @property
    def first(self) -> int:
        return self.offset

    @property
    def last(self) -> int:
        return self.offset + len(self.symbols) - 1


@dataclass(frozen=True)
class Cylinder:
    """{x : x[start : start + len(word)] = word}"""

    word: tuple[Symbol, ...]
    start: int = 0

    @classmethod
    def dotted(cls, u: Sequence[Symbol], v: Sequence[Symbol]) -> "Cylinder":
        """[u.v] = [uv] placed at -|u|"""
        return cls(tuple(u) + tuple(v), -len(u))

    def shift_preimage(self) -> "Cylinder":
        """S^{-1}[w, s] = [w, s + 1]"""
        return Cylinder(self.word, self.start + 1)

    def __str__(self) -> str:
        u = self.word[: max(0, -self.start)]
        v = self.word[max(0, -self.start) :]
        return f"[{'-'.join(map(str, u))}.{'-'.join(map(str, v))}]@{self.start}"


@dataclass(frozen=True)
class CylinderSet:
    """Disjoint union of cylinders sharing one window"""

    cylinders: tuple[Cylinder, ...]

    def __post_init__(self):
        if not self.cylinders:
            raise MalformedInput("A cylinder set needs at least one cylinder")
        first = self.cylinders[0]
        for c in self.cylinders:
            if c.start != first.start or len(c.word) != len(first.word):
                raise MalformedInput("Cylinders of one set must share start and length")

    @classmethod
    def anchors(cls, alphabet: Sequence[Symbol]) -> "CylinderSet":
        """Points whose 0-coordinate is not 1"""
        return cls(tuple(Cylinder((a,), 0) for a in alphabet if a != 1))

    @property
    def start(self) -> int:
        return self.cylinders[0].start

    @property
    def length(self) -> int:
        return len(self.cylinders[0].word)

    @property
    def words(self) -> frozenset:
        return frozenset(c.word for c in self.cylinders)

    def shift_preimage(self) -> "CylinderSet":
        return CylinderSet(tuple(c.shift_preimage() for c in self.cylinders))


def as_cylinder_set(a) -> CylinderSet:
    return a if isinstance(a, CylinderSet) else CylinderSet((a,))


class HitCounter:
    """S_N 1_A along a walk through prefix sums over its coordinates"""

    def __init__(self, walk: Walk, target):
        self.walk = walk
        self.target = as_cylinder_set(target)
        words = self.target.words
        L = self.target.length
        s = walk.symbols
        marks = [int(tuple(s[k : k + L]) in words) for k in range(len(s) - L + 1)]
        self._prefix = [0, *accumulate(marks)]

    def max_horizon(self) -> int:
        """Largest N whose window [-N, N-1] is readable for this target"""
        lo = self.walk.first - self.target.start
        hi = self.walk.last - self.target.start - self.target.length + 1
        return max(0, min(-lo, hi + 1))

    def count(self, N: int) -> int:
        if N <= 0:
            return 0
        if N > self.max_horizon():
            raise WindowOutOfRange(f"Horizon {N} exceeds the walk", index=N)
        lo = -N + self.target.start - self.walk.offset
        hi = N - 1 + self.target.start - self.walk.offset
        return self._prefix[hi + 1] - self._prefix[lo]


def orbit_walks(spec: RankOneSpec, alpha: Partition, samples: Sequence[Rational], depth: int) -> list[Walk]:
    """α-name of the whole stage-column fiber through each sample, origin at the sample"""
    stage = build_stage(spec, depth)
    fibers = column_names(spec, alpha, depth)
    walks = []
    for y in samples:
        j, offset = stage.require(y)
        base_point = stage.starts[0] + offset
        name = next(n for piece, n in fibers if piece.contains(base_point))
        walks.append(Walk(tuple(name), -j))
    return walks


@dataclass(frozen=True)
class OrbitVerdict:
    regime: OrbitRegime
    horizon: int
    count_at_horizon: int
    count_before: int
    low_confidence: bool = False


def bounded_orbit_detect(walk: Walk, K, budget: Optional[int] = None) -> OrbitVerdict:
    """DETECTED when S_N 1_K does not grow over the last `budget` readable horizons"""
    budget = settings.stall_budget if budget is None else budget
    counter = HitCounter(walk, K)
    L = counter.max_horizon()
    b = min(budget, L)
    at, before = counter.count(L), counter.count(L - b)
    regime = OrbitRegime.DETECTED if at == before else OrbitRegime.UNBOUNDED
    return OrbitVerdict(regime, L, at, before, low_confidence=b == 0)


def radon_estimate(walk: Walk, A, K, horizons: Sequence[int], budget: Optional[int] = None) -> list[Optional[Fraction]]:
    """S_N 1_A / S_N 1_K at each horizon; None where K was never hit"""
    verdict = bounded_orbit_detect(walk, K, budget)
    if verdict.regime is OrbitRegime.DETECTED and not verdict.low_confidence:
        raise BoundedOrbitDetected(
            f"S_N 1_K stalls at {verdict.count_at_horizon} hits; the limit is a counting measure",
            horizon=verdict.horizon,
        )
    a_hits, k_hits = HitCounter(walk, A), HitCounter(walk, K)
    out = []
    for N in horizons:
        k = k_hits.count(N)
        out.append(Fraction(a_hits.count(N), k) if k else None)
    return out


def anchor_radius(A: CylinderSet) -> Optional[int]:
    """Least m with 1_A ≤ S_m 1_K for K the anchor set; None for all-1 words"""
    best = None
    for c in A.cylinders:
        radii = [max(-(c.start + q), c.start + q + 1) for q, s in enumerate(c.word) if s != 1]
        if not radii:
            return None
        best = max(best or 0, min(radii))
    return best


@dataclass
class CriteriaResult:
    """Existence-criteria outcome for one tested set A"""

    label: str
    m_found: Optional[int] = None
    c_estimate: Optional[Fraction] = None
    witnesses: list[tuple[int, int, Fraction]] = field(default_factory=list)
    tail_stable: bool = True
    limits_agree: bool = True
    exact_ratio: Optional[Fraction] = None
    max_error: Optional[Fraction] = None
    exact_ok: Optional[bool] = None
    minimal: Optional[bool] = None
    shift_pairs: int = 0
    shift_violations: int = 0
    bound_pairs: int = 0
    bound_violations: int = 0

    @property
    def consistent(self) -> bool:
        return (
            self.m_found is not None
            and self.exact_ok is not False
            and self.minimal is not False
            and self.shift_violations == 0
            and self.bound_violations == 0
        )


@dataclass
class CriteriaReport:
    epsilon: Fraction
    results: list[CriteriaResult]

    @property
    def consistent(self) -> bool:
        return all(r.consistent for r in self.results)


def _ratio_series(a: HitCounter, k: HitCounter, horizons: Sequence[int]) -> list[tuple[int, int, Fraction]]:
    series = []
    for N in horizons:
        hits = k.count(N)
        if hits:
            series.append((N, hits, Fraction(a.count(N), hits)))
    return series


def prop32_check(
    model,
    K,
    A_list: Sequence,
    walks: Sequence[Walk],
    epsilon: Rational,
    m_schedule: Optional[Sequence[int]] = None,
    strict: bool = False,
) -> CriteriaReport:
    """Check the Radon-measure existence criteria on walks for each set A

    (1) past some hit threshold m every ratio sits within ε of one constant c;
    (2) each walk's ratio tail oscillates less than ε and the walk limits agree;
    (3) the ratios match μ̂(A)/μ̂(K) from `model` (skipped when model is None).
    Both key proof inequalities are counted on every readable (walk, N).
    """
    epsilon = Fraction(epsilon)
    m_schedule = sorted(settings.m_schedule if m_schedule is None else m_schedule)
    K = as_cylinder_set(K)
    k_anchor = model is not None and K.words == CylinderSet.anchors(model.alphabet).words
    mass_k = None
    if model is not None:
        mass_k = sum(model.word_measure(w).as_fraction() for w in K.words)
        if mass_k == 0:
            raise PreconditionError("K must have positive measure")

    results = []
    for A in A_list:
        A = as_cylinder_set(A)
        result = CriteriaResult(label=", ".join(str(c) for c in A.cylinders))
        pre = A.shift_preimage()
        m_bound = anchor_radius(A) if k_anchor else None
        all_rows: list[tuple[int, int, Fraction]] = []
        finals: list[Fraction] = []
        for wi, walk in enumerate(walks):
            a_hits, k_hits, pre_hits = HitCounter(walk, A), HitCounter(walk, K), HitCounter(walk, pre)
            L = min(a_hits.max_horizon(), k_hits.max_horizon())
            series = _ratio_series(a_hits, k_hits, range(1, L + 1))
            all_rows.extend((wi, hits, r) for _, hits, r in series)
            if series:
                finals.append(series[-1][2])
                tail = [r for _, _, r in series[len(series) // 2 :]]
                if max(tail) - min(tail) >= epsilon:
                    result.tail_stable = False
            for N in range(1, min(L, pre_hits.max_horizon()) + 1):
                result.shift_pairs += 1
                if abs(pre_hits.count(N) - a_hits.count(N)) > 1:
                    result.shift_violations += 1
            if m_bound is not None:
                m = m_bound
                for N in range(1, L + 1):
                    result.bound_pairs += 1
                    if a_hits.count(N) > 2 * m * k_hits.count(N) + m * m:
                        result.bound_violations += 1

        for m in m_schedule:
            rows = [row for row in all_rows if row[1] >= m]
            if not rows:
                break
            lo, hi = min(r for _, _, r in rows), max(r for _, _, r in rows)
            c = (lo + hi) / 2
            result.witnesses = [row for row in rows if abs(row[2] - c) >= epsilon]
            if not result.witnesses:
                result.m_found, result.c_estimate = m, c
                break
        if finals:
            result.limits_agree = max(finals) - min(finals) < 2 * epsilon
        if model is not None:
            mass_a = sum(model.word_measure(w).as_fraction() for w in A.words)
            result.exact_ratio = mass_a / mass_k
            result.minimal = mass_a > 0
            if finals:
                result.max_error = max(abs(f - result.exact_ratio) for f in finals)
                result.exact_ok = result.max_error <= epsilon
        if strict and (result.shift_violations or result.bound_violations):
            raise PreconditionError(
                f"Proof inequality violated for {result.label}",
                shift=result.shift_violations,
                bound=result.bound_violations,
            )
        logger.debug(
            f"Criteria for {result.label}: m={result.m_found}, c={result.c_estimate}, "
            f"exact={result.exact_ratio}, shift violations={result.shift_violations}"
        )
        results.append(result)
    return CriteriaReport(epsilon, results)
