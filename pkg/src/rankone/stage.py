"""Stage columns of a rank-one system and the point dynamics they carry"""

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Optional

from loguru import logger

from src.config.settings import settings
from src.errors import DepthExceeded, NeedsDeeperStage, NoReturnWithinBudget, PreconditionError, UnresolvedMass
from src.rankone.spec import RankOneSpec
from src.sets.intervals import IntervalMap, IntervalSet, Rational
from src.towers.tower import Column, StandardTower

Point = Fraction
Cell = tuple[int, Fraction, Fraction]


@dataclass(frozen=True)
class StageTower:
    """The explicit stage-k column: level j is [starts[j], starts[j] + width)"""

    depth: int
    height: int
    width: Fraction
    starts: tuple[Fraction, ...]
    used_region: IntervalSet

    @cached_property
    def _sorted(self) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
        order = tuple(sorted(range(self.height), key=self.starts.__getitem__))
        return order, tuple(self.starts[i] for i in order)

    @cached_property
    def levels(self) -> tuple[IntervalSet, ...]:
        return tuple(self.level(j) for j in range(self.height))

    @cached_property
    def level_map(self) -> IntervalMap:
        order, sorted_starts = self._sorted
        return IntervalMap(sorted_starts, tuple(s + self.width for s in sorted_starts), order)

    @property
    def base(self) -> IntervalSet:
        return self.level(0)

    def level(self, j: int) -> IntervalSet:
        return IntervalSet.of((self.starts[j], self.starts[j] + self.width))

    def locate(self, y: Rational) -> Optional[tuple[int, Fraction]]:
        """(level index, offset inside the level) of y, or None outside the column"""
        y = Fraction(y)
        order, sorted_starts = self._sorted
        i = bisect_right(sorted_starts, y) - 1
        if i >= 0 and y < sorted_starts[i] + self.width:
            return order[i], y - sorted_starts[i]
        return None

    def require(self, y: Rational) -> tuple[int, Fraction]:
        loc = self.locate(y)
        if loc is None:
            raise NeedsDeeperStage(f"{y} lies outside the stage-{self.depth} column", point=y)
        return loc

    def cells(self, s: IntervalSet) -> list[Cell]:
        """Decompose s into level pieces (level, offset_lo, offset_hi)"""
        out = []
        for p, q in s.intervals:
            for a, b, j in self.level_map.pieces(p, q):
                if j is None:
                    raise NeedsDeeperStage(
                        f"Set reaches [{a},{b}) outside the stage-{self.depth} column"
                    )
                out.append((j, a - self.starts[j], b - self.starts[j]))
        return out

    def from_cells(self, cells: Iterable[Cell]) -> IntervalSet:
        return IntervalSet(tuple((self.starts[j] + a, self.starts[j] + b) for j, a, b in cells))

    def push(self, s: IntervalSet, k: int) -> IntervalSet:
        """Exact image T^k(s) computed through the column"""
        moved = []
        for j, a, b in self.cells(s):
            if not 0 <= j + k < self.height:
                raise NeedsDeeperStage(f"T^{k} leaves the stage-{self.depth} column", index=k)
            moved.append((j + k, a, b))
        return self.from_cells(moved)

    def name_pieces(
        self,
        base: IntervalSet,
        lo: int,
        hi: int,
        labeler: IntervalMap,
        default: Hashable = None,
        unknown: Hashable = None,
        unresolved_ok: bool = False,
    ) -> list[tuple[IntervalSet, tuple]]:
        """Split `base` into pieces whose orbit names over positions [lo, hi) are constant

        Each name symbol is the label of the level piece the orbit visits;
        `default` stands for unlabelled mass. Positions outside the column
        raise NeedsDeeperStage unless `unresolved_ok`, in which case they
        read as `unknown`.
        """
        grouped: dict[tuple, list[tuple[Fraction, Fraction]]] = {}
        for j, a, b in self.cells(base):
            current: list[list] = [[a, b, []]]
            for k in range(lo, hi):
                jj = j + k
                if not 0 <= jj < self.height:
                    if not unresolved_ok:
                        raise NeedsDeeperStage(
                            f"Name position {k} leaves the stage-{self.depth} column", index=k
                        )
                    for piece in current:
                        piece[2].append(unknown)
                    continue
                s = self.starts[jj]
                nxt: list[list] = []
                for x, y, name in current:
                    parts = labeler.pieces(s + x, s + y)
                    for idx, (p, q, label) in enumerate(parts):
                        symbol = default if label is None else label
                        carried = name if idx == len(parts) - 1 else list(name)
                        carried.append(symbol)
                        nxt.append([p - s, q - s, carried])
                current = nxt
            origin = self.starts[j]
            for x, y, name in current:
                grouped.setdefault(tuple(name), []).append((origin + x, origin + y))
        pieces = [(IntervalSet(tuple(pairs)), name) for name, pairs in grouped.items()]
        pieces.sort(key=lambda item: item[0].lo)
        return pieces


@lru_cache(maxsize=64)
def _build_stage(spec: RankOneSpec, k: int) -> StageTower:
    lo, hi = spec.base.intervals[0]
    if k == 1:
        return StageTower(1, 1, hi - lo, (lo,), IntervalSet.of((lo, hi)))
    prev = _build_stage(spec, k - 1)
    rule = spec.stages[k - 2]
    width = prev.width / rule.cuts
    next_free = prev.used_region.hi
    starts: list[Fraction] = []
    for i, spacers in enumerate(rule.spacers):
        shift = i * width
        starts.extend(st + shift for st in prev.starts)
        for _ in range(spacers):
            starts.append(next_free)
            next_free += width
    return StageTower(k, len(starts), width, tuple(starts), IntervalSet.of((lo, next_free)))


def build_stage(spec: RankOneSpec, k: int) -> StageTower:
    """Explicit stage-k column; spacers are allocated left to right from the first unused point"""
    if k < 1:
        raise PreconditionError(f"Stage depth must be at least 1, got {k}")
    if k > settings.max_depth:
        raise DepthExceeded(f"Depth {k} exceeds the configured maximum {settings.max_depth}", depth=k)
    if k > spec.max_stage:
        raise DepthExceeded(f"{spec.name} defines stages only up to {spec.max_stage}", depth=k)
    return _build_stage(spec, k)


def apply_T(spec: RankOneSpec, y: Rational, depth: int) -> Point:
    stage = build_stage(spec, depth)
    j, offset = stage.require(y)
    if j == stage.height - 1:
        raise NeedsDeeperStage(f"{y} is on the top level of the stage-{depth} column", index=1)
    return stage.starts[j + 1] + offset


def apply_T_inverse(spec: RankOneSpec, y: Rational, depth: int) -> Point:
    stage = build_stage(spec, depth)
    j, offset = stage.require(y)
    if j == 0:
        raise NeedsDeeperStage(f"{y} is on the base of the stage-{depth} column", index=-1)
    return stage.starts[j - 1] + offset


def orbit_segment(spec: RankOneSpec, y: Rational, m: int, n: int, depth: int) -> list[Point]:
    """[T^m y, ..., T^n y] read off the stage column"""
    if m > n:
        raise PreconditionError(f"Empty orbit window [{m}, {n}]")
    stage = build_stage(spec, depth)
    j, offset = stage.require(y)
    if j + m < 0:
        raise NeedsDeeperStage(f"T^{m} of {y} is below the column base", index=-(j + 1))
    if j + n >= stage.height:
        raise NeedsDeeperStage(f"T^{n} of {y} is above the column top", index=stage.height - j)
    return [stage.starts[j + i] + offset for i in range(m, n + 1)]


def feasible_horizon(spec: RankOneSpec, y: Rational, depth: int) -> int:
    """Largest N with the window [-N, N-1] around y inside the stage column"""
    stage = build_stage(spec, depth)
    j, _ = stage.require(y)
    return min(j, stage.height - j)


def return_time(spec: RankOneSpec, y: Rational, B: IntervalSet, max_steps: int, depth: int) -> int:
    """Least n >= 1 with T^n y in B"""
    if not B.contains(y):
        raise PreconditionError(f"{y} is not in the return set", point=y)
    stage = build_stage(spec, depth)
    j, offset = stage.require(y)
    for i in range(1, max_steps + 1):
        if j + i >= stage.height:
            raise NeedsDeeperStage(f"Return of {y} leaves the stage-{depth} column", index=i)
        if B.contains(stage.starts[j + i] + offset):
            return i
    raise NoReturnWithinBudget(f"{y} does not return within {max_steps} steps", max_steps=max_steps)


def return_time_tower(
    spec: RankOneSpec, B: IntervalSet, depth: int, allow_residual: bool = True
) -> StandardTower:
    """Tower over B with bases r_B^{-1}(i) and heights i

    Parts of B whose return leaves the column are reported as the tower's
    `unresolved` set; with nothing resolved, or with `allow_residual`
    off and a residual present, UnresolvedMass is raised.
    """
    stage = build_stage(spec, depth)
    cells = stage.cells(B)
    offsets: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for j, a, b in cells:
        offsets.setdefault(j, []).append((a, b))
    offset_sets = {j: IntervalSet(tuple(pairs)) for j, pairs in offsets.items()}
    b_levels = sorted(offset_sets)

    classes: dict[int, list[IntervalSet]] = {}
    residual: list[IntervalSet] = []
    for j, a, b in cells:
        pending = IntervalSet.of((a, b))
        idx = bisect_right(b_levels, j)
        while pending and idx < len(b_levels):
            target = b_levels[idx]
            hit = pending & offset_sets[target]
            if hit:
                classes.setdefault(target - j, []).append(hit.translate(stage.starts[j]))
                pending = pending - hit
            idx += 1
        if pending:
            residual.append(pending.translate(stage.starts[j]))

    unresolved = IntervalSet.union_all(residual)
    if not classes:
        raise UnresolvedMass(f"No part of B returns inside the stage-{depth} column")
    if unresolved and not allow_residual:
        raise UnresolvedMass(
            f"Mass {unresolved.measure()} of B has no return inside the stage-{depth} column",
            residual=unresolved,
        )
    columns = []
    for height in sorted(classes):
        base = IntervalSet.union_all(classes[height])
        levels = tuple(stage.push(base, k) for k in range(height))
        columns.append(Column(base, height, levels))
    if unresolved:
        logger.warning(f"Return-time tower leaves mass {unresolved.measure()} unresolved at depth {depth}")
    return StandardTower(tuple(columns), unresolved)
