"""Centred block distributions of names and their comparison with references"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Optional, Sequence

from loguru import logger

from src.errors import EmptyAnchor, WindowOutOfRange

BlockWord = tuple[Hashable, ...]


@dataclass(frozen=True)
class BlockDistribution:
    """Counts of (2n-1)-windows centred at anchors (positions whose symbol is not 1)"""

    block_counts: dict[BlockWord, int] = field(default_factory=dict)
    anchor_count: int = 0
    skipped: int = 0

    def frequency(self, word: BlockWord) -> Fraction:
        if self.anchor_count == 0:
            raise EmptyAnchor("Distribution has no anchors")
        return Fraction(self.block_counts.get(word, 0), self.anchor_count)


@dataclass(frozen=True)
class DistributionCheck:
    within: bool
    max_deviation: Fraction
    word: Optional[BlockWord]


def count_blocks(
    symbols: Sequence[Hashable],
    n: int,
    core: Optional[range] = None,
    strict: bool = False,
) -> BlockDistribution:
    """Count centred windows of `symbols`

    Anchors are taken from `core` (all positions by default). A window
    that runs past either end, or through an unknown (None) symbol, is
    skipped and counted in `skipped`; `strict` raises instead.
    """
    core = range(len(symbols)) if core is None else core
    reach = n - 1
    counts: dict[BlockWord, int] = {}
    anchors = skipped = 0
    for j in core:
        if symbols[j] in (1, None):
            continue
        lo, hi = j - reach, j + reach + 1
        window = tuple(symbols[lo:hi]) if lo >= 0 and hi <= len(symbols) else None
        if window is None or None in window:
            if strict:
                raise WindowOutOfRange(f"Window around position {j} is not readable", index=j)
            skipped += 1
            continue
        counts[window] = counts.get(window, 0) + 1
        anchors += 1
    if skipped:
        logger.debug(f"Skipped {skipped} boundary anchors for {2 * n - 1}-blocks")
    return BlockDistribution(counts, anchors, skipped)


def block_distribution(w, n: int) -> BlockDistribution:
    """The α (2n-1)-block distribution of a Word (or plain symbol sequence)"""
    symbols = getattr(w, "symbols", w)
    return count_blocks(tuple(symbols), n)


def distribution_within(e: BlockDistribution, ref: dict[BlockWord, Fraction], delta: Fraction) -> DistributionCheck:
    """True iff every word frequency is strictly closer than delta to the reference

    `word` is a word of maximal deviation; among tied words it is the last
    in repr order, so frequencies {(2,): 3/4, (3,): 1/4} against {(2,): 1}
    report (3,).
    """
    if e.anchor_count == 0:
        raise EmptyAnchor("Cannot compare a distribution without anchors")
    worst: Optional[BlockWord] = None
    worst_dev = Fraction(-1)
    for word in sorted(set(e.block_counts) | set(ref), key=repr):
        dev = abs(Fraction(e.block_counts.get(word, 0), e.anchor_count) - Fraction(ref.get(word, 0)))
        if dev >= worst_dev:
            worst, worst_dev = word, dev
    worst_dev = max(worst_dev, Fraction(0))
    return DistributionCheck(worst_dev < Fraction(delta), worst_dev, worst)
