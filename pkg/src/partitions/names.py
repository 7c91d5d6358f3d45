"""α-names of orbit sections, iterated joins and languages

Every name-based computation here sweeps the stage column once: the column
base is split into pieces with a constant name string, and an atom of
α_m^n is the union of the cells (level j, piece) whose window [j+m, j+n]
fits inside the column and reads the atom's word there.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Optional

from loguru import logger

from src.errors import LanguageTooLarge, MalformedInput, NeedsDeeperStage, PreconditionError
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec
from src.rankone.stage import StageTower, build_stage, orbit_segment
from src.sets.intervals import IntervalSet, Rational


@dataclass(frozen=True)
class Word:
    """A finite name; symbols[k] is the coordinate offset + k"""

    symbols: tuple[Hashable, ...]
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise MalformedInput("Words are nonempty")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return " ".join(str(s) for s in self.symbols)

    def to_json(self) -> dict:
        return {"symbols": list(self.symbols), "offset": self.offset}


def alpha_name(spec: RankOneSpec, alpha: Partition, y: Rational, m: int, n: int, depth: int) -> Word:
    """φ_α(y)_{[m,n]}"""
    points = orbit_segment(spec, y, m, n, depth)
    return Word(tuple(alpha.symbol_of(p) for p in points), m)


@lru_cache(maxsize=32)
def column_names(spec: RankOneSpec, alpha: Partition, depth: int) -> tuple[tuple[IntervalSet, tuple], ...]:
    """Base pieces of the stage column with their full α-name over the column"""
    stage = build_stage(spec, depth)
    if not alpha.K.issubset(stage.used_region):
        raise NeedsDeeperStage(f"Finite atoms reach beyond the stage-{depth} column")
    pieces = stage.name_pieces(stage.base, 0, stage.height, alpha.labeler, default=1)
    logger.debug(f"Stage-{depth} column splits into {len(pieces)} α-name fibers")
    return tuple(pieces)


def _cells_at(stage: StageTower, piece: IntervalSet, j: int) -> list[tuple[Fraction, Fraction]]:
    shift = stage.starts[j] - stage.starts[0]
    return [(p + shift, q + shift) for p, q in piece.intervals]


def word_cells(spec: RankOneSpec, alpha: Partition, m: int, n: int, depth: int):
    """Map every window word to its cells, plus the unresolved cells

    Returns (dict word -> list of pairs, list of unresolved pairs); all-1
    words are not collected.
    """
    if m > n:
        raise PreconditionError(f"Empty window [{m}, {n}]")
    stage = build_stage(spec, depth)
    if n - m + 1 > stage.height:
        raise NeedsDeeperStage(f"Window of length {n - m + 1} exceeds the stage-{depth} height")
    words: dict[tuple, list] = {}
    unresolved: list = []
    for piece, name in column_names(spec, alpha, depth):
        for j in range(stage.height):
            if j + m < 0 or j + n >= stage.height:
                unresolved.extend(_cells_at(stage, piece, j))
                continue
            word = name[j + m : j + n + 1]
            if all(s == 1 for s in word):
                continue
            words.setdefault(word, []).extend(_cells_at(stage, piece, j))
    return words, unresolved


def iterated_join(spec: RankOneSpec, alpha: Partition, m: int, n: int, depth: int) -> Partition:
    """α_m^n realized inside the stage column; atoms labelled and ordered by word"""
    words, unresolved = word_cells(spec, alpha, m, n, depth)
    ordered = sorted(words)
    return Partition(
        tuple(IntervalSet(tuple(words[w])) for w in ordered),
        tuple(ordered),
        IntervalSet(tuple(unresolved)),
    )


def language(
    spec: RankOneSpec, alpha: Partition, n: int, depth: int, sample_budget: Optional[int] = None
) -> set[Word]:
    """Length-n words of positive measure; the all-1 word is always included

    `sample_budget` caps the size of the returned language.
    """
    if n < 1:
        raise PreconditionError("Word length must be at least 1")
    joined = iterated_join(spec, alpha, 0, n - 1, depth)
    words = {Word(w) for w in joined.labels} | {Word((1,) * n)}
    if sample_budget is not None and len(words) > sample_budget:
        raise LanguageTooLarge(f"Language of length {n} has {len(words)} words", budget=sample_budget)
    return words


def reference_distribution(
    spec: RankOneSpec, alpha: Partition, n: int, depth: int, K: Optional[IntervalSet] = None
) -> dict[tuple, Fraction]:
    """Exact (2n-1)-block reference: ν(atom of α_{-n+1}^{n-1}) / ν(K) for anchor-centred words"""
    K = alpha.K if K is None else K
    if K.measure() == 0:
        raise PreconditionError("Reference distribution needs ν(K) > 0")
    words, _ = word_cells(spec, alpha, -(n - 1), n - 1, depth)
    mass = K.measure()
    return {
        w: IntervalSet(tuple(cells)).measure() / mass
        for w, cells in sorted(words.items())
        if w[n - 1] != 1
    }
