"""Tower surgery: refinement by partitions, block splitting and uniting"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence, Union

from loguru import logger

from src.errors import HeightMismatch, NeedsDeeperStage, NotRepresentable, PreconditionError
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec
from src.rankone.stage import build_stage
from src.sets.intervals import IntervalSet
from src.towers.tower import Column, StandardTower


@dataclass(frozen=True)
class KStandardReport:
    """Outcome of the K-standard predicate with the offending parts"""

    ok: bool
    uncovered: IntervalSet
    straddling: tuple[tuple[int, int], ...] = ()
    columns_without_K: tuple[int, ...] = ()


@dataclass(frozen=True)
class RefinementReport:
    ok: bool
    base_inclusion: bool
    offending_levels: tuple[tuple[int, int], ...] = field(default_factory=tuple)


def is_K_standard(t: StandardTower, K: IntervalSet) -> KStandardReport:
    """K ⊆ K_t, every level inside K or outside it, every column meeting K"""
    uncovered = K - t.principal_region
    straddling = []
    missing = []
    for ci, col in enumerate(t.columns):
        has_k = False
        for li, level in enumerate(col.level_sets):
            inside = level.issubset(K)
            if inside:
                has_k = True
            elif level.intersects(K):
                straddling.append((ci, li))
        if not has_k:
            missing.append(ci)
    ok = uncovered.is_empty and not straddling and not missing
    return KStandardReport(ok, uncovered, tuple(straddling), tuple(missing))


def refine_according_to(
    spec: RankOneSpec, t: StandardTower, alpha: Partition, depth: int, margin: int = 0
) -> StandardTower:
    """Split every column into subcolumns of constant fiber α-name

    With `margin` > 0 the names are read on the window widened by `margin`
    positions at both ends; positions outside the stage column read as None.
    """
    stage = build_stage(spec, depth)
    columns = []
    for col in t.columns:
        pieces = stage.name_pieces(
            col.base,
            -margin,
            col.height + margin,
            alpha.labeler,
            default=1,
            unknown=None,
            unresolved_ok=margin > 0,
        )
        for piece, name in pieces:
            levels = (piece,) + tuple(stage.push(piece, k) for k in range(1, col.height))
            columns.append(
                Column(
                    base=piece,
                    height=col.height,
                    level_sets=levels,
                    level_names=name[margin : margin + col.height],
                    prefix_names=name[:margin],
                    suffix_names=name[margin + col.height :],
                )
            )
    logger.debug(f"Refinement split {len(t.columns)} columns into {len(columns)}")
    return StandardTower(tuple(columns), t.unresolved)


def frobenius_decompose(h: int, N: int) -> tuple[int, int]:
    """(a, b) with h = aN + b(N+1), a maximal"""
    if N < 1:
        raise PreconditionError(f"Block size must be positive, got {N}")
    b = h % N
    if h < N or b * (N + 1) > h:
        raise NotRepresentable(f"{h} is not a sum of blocks of {N} and {N + 1}", h=h, N=N)
    return (h - b * (N + 1)) // N, b


KeySpec = Union[Callable[[Column], Hashable], Sequence[Hashable]]


def unite_columns_by_name(t: StandardTower, key: KeySpec) -> StandardTower:
    """Unite columns sharing a key; keys come from a callable or one per column"""
    keys = [key(c) for c in t.columns] if callable(key) else list(key)
    groups: dict[Hashable, list[Column]] = {}
    for k, col in zip(keys, t.columns):
        bucket = groups.setdefault(k, [])
        if bucket and bucket[0].height != col.height:
            raise HeightMismatch(
                f"Columns with key {k!r} have heights {bucket[0].height} and {col.height}"
            )
        bucket.append(col)
    return StandardTower(tuple(_unite(cols) for cols in groups.values()), t.unresolved)


def _common(values: list):
    return values[0] if all(v == values[0] for v in values) else None


def _unite(cols: list[Column]) -> Column:
    if len(cols) == 1:
        return cols[0]
    height = cols[0].height
    levels = tuple(IntervalSet.union_all(c.level_sets[k] for c in cols) for k in range(height))
    return Column(
        base=levels[0],
        height=height,
        level_sets=levels,
        level_names=_common([c.level_names for c in cols]),
        prefix_names=_common([c.prefix_names for c in cols]) or (),
        suffix_names=_common([c.suffix_names for c in cols]) or (),
    )


def unite_into_infinite_level(t: StandardTower, victims: Iterable[int]) -> StandardTower:
    """Drop the victim columns; their levels join the infinite level"""
    victims = set(victims)
    kept = tuple(c for i, c in enumerate(t.columns) if i not in victims)
    if not kept and t.columns:
        logger.warning("Every principal column was united into the infinite level")
    return StandardTower(kept, t.unresolved)


def columns_missing(t: StandardTower, K: IntervalSet) -> list[int]:
    """Indices of columns with no level inside K"""
    return [i for i, c in enumerate(t.columns) if not any(s.issubset(K) for s in c.level_sets)]


def tower_partition(t: StandardTower) -> Partition:
    """Partition whose finite atoms are the principal levels, labelled (column, level)"""
    atoms = []
    labels = []
    for ci, col in enumerate(t.columns):
        for li, level in enumerate(col.level_sets):
            atoms.append(level)
            labels.append((ci, li))
    return Partition(tuple(atoms), tuple(labels))


def refines(t2: StandardTower, t1: StandardTower) -> RefinementReport:
    """B(t2) ⊆ B(t1) and every t2 level inside a t1 level or the infinite level"""
    base_ok = t2.base_region.issubset(t1.base_region)
    offending = []
    for ci, col in enumerate(t2.columns):
        for li, level in enumerate(col.level_sets):
            if len(t1.level_map.split(level)) != 1:
                offending.append((ci, li))
    return RefinementReport(base_ok and not offending, base_ok, tuple(offending))


def build_K_standard(spec: RankOneSpec, K: IntervalSet, N: int, depth: int) -> StandardTower:
    """K-standard tower with principal heights N or N+1

    The stage column over the depth-stage base is refined by {K, Y∖K}, cut
    into a blocks of N then b blocks of N+1 levels, united by K-name, and
    columns disjoint from K go to the infinite level.
    """
    if K.measure() == 0:
        raise PreconditionError("K must have positive measure")
    stage = build_stage(spec, depth)
    if not K.issubset(stage.used_region):
        raise NeedsDeeperStage(f"K reaches beyond the stage-{depth} column")
    a, b = frobenius_decompose(stage.height, N)

    column = Column(stage.base, stage.height, stage.levels)
    refined = refine_according_to(spec, StandardTower((column,)), Partition((K,)), depth)
    blocks = []
    for col in refined.columns:
        pos = 0
        for length in [N] * a + [N + 1] * b:
            blocks.append(_block(col, pos, length))
            pos += length

    united = unite_columns_by_name(StandardTower(tuple(blocks)), key=lambda c: c.level_names)
    victims = [i for i, c in enumerate(united.columns) if all(s == 1 for s in c.level_names)]
    tower = unite_into_infinite_level(united, victims)
    logger.info(
        f"Built K-standard tower: depth={depth}, N={N}, columns={len(tower.columns)}, "
        f"principal mass={tower.principal_mass}"
    )
    return tower


def _block(col: Column, pos: int, length: int) -> Column:
    names = None if col.level_names is None else col.level_names[pos : pos + length]
    return Column(col.level_sets[pos], length, col.level_sets[pos : pos + length], names)


def segment_fiber(names: Sequence, heights: Sequence[int], n: int, N: int) -> list[tuple[int, int]]:
    """Cut one fiber of the stage column into (start, length) blocks

    `names[p]` is the (column, level) of the coarser tower visited at
    position p, or None on its infinite level. Blocks start at bottoms of
    the coarser tower; the next cut is the bottom nearest to s+n+2N inside
    [s+n, s+n+4N], ties downward. Without a bottom in reach the block ends
    with the last traversal begun in [s, s+n), but not before s+n.
    """
    bottoms = [p for p, label in enumerate(names) if label is not None and label[1] == 0]
    first = next((p for p, label in enumerate(names) if label is not None), None)
    if first is None:
        return []
    if not bottoms or first < bottoms[0]:
        raise NeedsDeeperStage("Fiber enters the coarser tower above a base level", index=first)
    size = len(names)
    reach = n + 4 * N
    ideal = n + 2 * N
    blocks: list[tuple[int, int]] = []
    s: Optional[int] = bottoms[0]
    while s is not None:
        lo_i = bisect_left(bottoms, s + n)
        hi_i = bisect_right(bottoms, s + reach)
        candidates = bottoms[lo_i:hi_i]
        if candidates:
            cut = min(candidates, key=lambda p: (abs(p - (s + ideal)), p))
            blocks.append((s, cut - s))
            s = cut
            continue
        covered = max(p + heights[names[p][0]] for p in bottoms[bisect_left(bottoms, s) : lo_i])
        end = max(s + n, covered)
        if end <= size:
            blocks.append((s, end - s))
        elif covered <= size and blocks and covered - blocks[-1][0] <= reach:
            start, _ = blocks.pop()
            blocks.append((start, covered - start))
        else:
            raise NeedsDeeperStage("Final block does not fit below the column top", index=s)
        s = bottoms[hi_i] if hi_i < len(bottoms) else None
    return blocks


def refine_K_standard(spec: RankOneSpec, t1: StandardTower, K: IntervalSet, n: int, depth: int) -> StandardTower:
    """K-standard tower refining t1 with principal heights in [n, n + 4N]"""
    if not is_K_standard(t1, K).ok:
        raise PreconditionError("refine_K_standard needs a K-standard input tower")
    if n < 1:
        raise PreconditionError(f"Height floor must be positive, got {n}")
    N = t1.max_height
    stage = build_stage(spec, depth)
    heights = t1.heights
    fibers = stage.name_pieces(stage.base, 0, stage.height, t1.level_map, default=None)

    blocks = []
    for piece, names in fibers:
        for start, length in segment_fiber(names, heights, n, N):
            levels = tuple(stage.push(piece, start + k) for k in range(length))
            blocks.append(Column(levels[0], length, levels, names[start : start + length]))

    # unite subcolumns over a common t1 column, then by height, then split by t1-names
    tower = unite_columns_by_name(StandardTower(tuple(blocks)), key=lambda c: (c.level_names[0][0], c.height))
    tower = unite_columns_by_name(tower, key=lambda c: c.height)
    tower = refine_according_to(spec, tower, tower_partition(t1), depth)
    tower = unite_into_infinite_level(tower, columns_missing(tower, K))
    logger.info(
        f"Refined K-standard tower: n={n}, N={N}, columns={len(tower.columns)}, "
        f"heights in [{min(tower.heights, default=0)}, {tower.max_height}]"
    )
    return tower


def canonical_tower_sequence(spec: RankOneSpec, K: IntervalSet, depths: Iterable[int]) -> list[StandardTower]:
    """One-column towers given by the stage columns, refined by {K, Y∖K}"""
    towers = []
    for d in depths:
        stage = build_stage(spec, d)
        column = Column(stage.base, stage.height, stage.levels)
        towers.append(refine_according_to(spec, StandardTower((column,)), Partition((K,)), d))
    return towers
