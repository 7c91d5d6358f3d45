"""Columns and standard Kakutani-Rohlin towers"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Optional

from src.errors import MalformedInput
from src.sets.intervals import EMPTY, IntervalMap, IntervalSet

Name = Optional[Hashable]


@dataclass(frozen=True)
class Column:
    """A column {B, TB, ..., T^(h-1)B} with optional per-level names

    `prefix_names` and `suffix_names` hold names read just below the base
    and just above the top, when a refinement was made with a margin.
    """

    base: IntervalSet
    height: int
    level_sets: tuple[IntervalSet, ...]
    level_names: Optional[tuple[Name, ...]] = None
    prefix_names: tuple[Name, ...] = ()
    suffix_names: tuple[Name, ...] = ()

    def __post_init__(self):
        if self.height < 1 or len(self.level_sets) != self.height:
            raise MalformedInput(f"Column of height {self.height} has {len(self.level_sets)} levels")
        if self.level_sets[0] != self.base:
            raise MalformedInput("Level 0 of a column must be its base")
        if self.level_names is not None and len(self.level_names) != self.height:
            raise MalformedInput("level_names must have one entry per level")

    @property
    def base_measure(self) -> Fraction:
        return self.base.measure()

    @property
    def mass(self) -> Fraction:
        return self.height * self.base_measure

    @cached_property
    def region(self) -> IntervalSet:
        return IntervalSet.union_all(self.level_sets)

    def padded_names(self) -> tuple[Name, ...]:
        if self.level_names is None:
            raise MalformedInput("Column carries no names")
        return self.prefix_names + self.level_names + self.suffix_names

    def with_names(self, names: Optional[tuple[Name, ...]]) -> "Column":
        return Column(self.base, self.height, self.level_sets, names, self.prefix_names, self.suffix_names)

    def to_json(self) -> dict:
        data = {
            "base": self.base.to_json(),
            "height": self.height,
            "levels": [s.to_json() for s in self.level_sets],
        }
        if self.level_names is not None:
            data["names"] = [_name_json(n) for n in self.level_names]
        return data


def _name_json(name: Name):
    if name is None or isinstance(name, (int, str)):
        return name
    return list(name)


@dataclass(frozen=True)
class StandardTower:
    """Principal columns plus the implicit infinite level

    The infinite level is everything outside the principal levels.
    `unresolved` carries mass a construction could not classify at depth.
    """

    columns: tuple[Column, ...]
    unresolved: IntervalSet = EMPTY

    @property
    def degenerate(self) -> bool:
        return not self.columns

    @property
    def heights(self) -> list[int]:
        return [c.height for c in self.columns]

    @property
    def max_height(self) -> int:
        return max(self.heights, default=0)

    @property
    def principal_mass(self) -> Fraction:
        return sum((c.mass for c in self.columns), Fraction(0))

    @cached_property
    def principal_region(self) -> IntervalSet:
        return IntervalSet.union_all(s for c in self.columns for s in c.level_sets)

    @cached_property
    def base_region(self) -> IntervalSet:
        return IntervalSet.union_all(c.base for c in self.columns)

    @cached_property
    def level_map(self) -> IntervalMap:
        """Lookup from points to (column, level); raises if levels overlap"""
        return IntervalMap.from_sets(
            ((ci, li), s) for ci, c in enumerate(self.columns) for li, s in enumerate(c.level_sets)
        )

    def validate(self) -> None:
        """Check disjointness of all principal levels and equal level measures"""
        _ = self.level_map
        for ci, c in enumerate(self.columns):
            if any(s.measure() != c.base_measure for s in c.level_sets):
                raise MalformedInput(f"Column {ci} has levels of unequal measure")

    def to_json(self) -> dict:
        return {
            "columns": [c.to_json() for c in self.columns],
            "unresolved": self.unresolved.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "StandardTower":
        columns = []
        for item in data["columns"]:
            levels = tuple(IntervalSet.from_json(lv) for lv in item["levels"])
            names = item.get("names")
            columns.append(
                Column(
                    base=IntervalSet.from_json(item["base"]),
                    height=int(item["height"]),
                    level_sets=levels,
                    level_names=None if names is None else tuple(
                        tuple(n) if isinstance(n, list) else n for n in names
                    ),
                )
            )
        return cls(tuple(columns), IntervalSet.from_json(data.get("unresolved", [])))
