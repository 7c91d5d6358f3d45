"""Finite partitions with one implicit infinite atom, joins and the d-metric"""

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Optional

from src.errors import AlphabetMismatch, MalformedInput, NotFinitePartition
from src.sets.intervals import EMPTY, IntervalMap, IntervalSet, MeasureValue, Rational


@dataclass(frozen=True)
class Partition:
    """α = {A_1, ..., A_N}; A_1 is the complement of the finite atoms

    Finite atom i (i >= 2) is `finite_atoms[i - 2]`. `labels` optionally
    records where each finite atom came from (join pairs or words);
    `unresolved` is mass whose atom could not be decided at depth.
    """

    finite_atoms: tuple[IntervalSet, ...]
    labels: Optional[tuple[Hashable, ...]] = None
    unresolved: IntervalSet = EMPTY

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.finite_atoms):
            raise MalformedInput("One label per finite atom is required")
        for i, atom in enumerate(self.finite_atoms, start=2):
            if atom.is_empty:
                raise NotFinitePartition(f"Finite atom {i} is empty")
        _ = self.labeler

    @classmethod
    def of(cls, *atoms: IntervalSet) -> "Partition":
        return cls(tuple(atoms))

    @classmethod
    def trivial(cls) -> "Partition":
        """The partition {Y}"""
        return cls(())

    @property
    def size(self) -> int:
        """Alphabet size N, counting the infinite atom"""
        return len(self.finite_atoms) + 1

    @property
    def alphabet(self) -> range:
        return range(1, self.size + 1)

    def atom(self, i: int) -> IntervalSet:
        if i == 1:
            raise NotFinitePartition("Atom 1 is the implicit infinite atom")
        return self.finite_atoms[i - 2]

    def label(self, i: int) -> Hashable:
        if i == 1 or self.labels is None:
            return i
        return self.labels[i - 2]

    @cached_property
    def K(self) -> IntervalSet:
        """K_α, the union of the finite atoms"""
        return IntervalSet.union_all(self.finite_atoms)

    @cached_property
    def labeler(self) -> IntervalMap:
        """Point-to-symbol lookup; unlabelled points belong to atom 1"""
        return IntervalMap.from_sets((i, a) for i, a in enumerate(self.finite_atoms, start=2))

    def symbol_of(self, x: Rational) -> int:
        symbol = self.labeler.lookup(x)
        return 1 if symbol is None else symbol

    def to_json(self) -> dict:
        return {"finite_atoms": [a.to_json() for a in self.finite_atoms]}

    @classmethod
    def from_json(cls, data: dict) -> "Partition":
        try:
            atoms = data["finite_atoms"]
        except (KeyError, TypeError) as e:
            raise MalformedInput(f"Partition needs 'finite_atoms': {e}") from e
        return cls(tuple(IntervalSet.from_json(a) for a in atoms))


def join(alpha: Partition, beta: Partition) -> Partition:
    """Common refinement; finite atoms indexed lexicographically by (i, j)"""
    atoms = []
    labels = []
    for i in alpha.alphabet:
        for j in beta.alphabet:
            if i == 1 and j == 1:
                continue
            if i == 1:
                piece = beta.atom(j) - alpha.K
            elif j == 1:
                piece = alpha.atom(i) - beta.K
            else:
                piece = alpha.atom(i) & beta.atom(j)
            if piece:
                atoms.append(piece)
                labels.append((i, j))
    return Partition(tuple(atoms), tuple(labels), alpha.unresolved | beta.unresolved)


def partition_distance(alpha: Partition, beta: Partition) -> MeasureValue:
    """d(α, β) = Σ_{i≠1} ν(A_i △ B_i)"""
    if alpha.size != beta.size:
        raise AlphabetMismatch(f"Alphabet sizes differ: {alpha.size} vs {beta.size}")
    return MeasureValue(
        sum((a.symmetric_difference(b).measure() for a, b in zip(alpha.finite_atoms, beta.finite_atoms)), 0)
    )


def is_finer(alpha: Partition, beta: Partition) -> bool:
    """Every finite atom of α lies inside a single atom of β"""
    for atom in alpha.finite_atoms:
        inside_one = any(atom.issubset(b) for b in beta.finite_atoms) or not atom.intersects(beta.K)
        if not inside_one:
            return False
    return True


def refines_with_same_support(alpha: Partition, beta: Partition) -> bool:
    """α ≽ β: α finer than β and K_α = K_β"""
    return alpha.K == beta.K and is_finer(alpha, beta)
