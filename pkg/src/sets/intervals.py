"""Exact rational interval sets, labelled interval maps and extended measures"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence, Union

from src.errors import MalformedInput, NegativeEndpoint, PreconditionError
from src.models.enums import SetOperation

Rational = Union[Fraction, int]
Pair = tuple[Fraction, Fraction]


@dataclass(frozen=True, eq=False)
class MeasureValue:
    """A nonnegative exact rational, or INFINITE (value None)"""

    value: Optional[Fraction]

    def __post_init__(self):
        if self.value is not None:
            value = Fraction(self.value)
            if value < 0:
                raise PreconditionError(f"Negative measure {value}")
            object.__setattr__(self, "value", value)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def as_fraction(self) -> Fraction:
        """Return the finite value, refusing INFINITE"""
        if self.value is None:
            raise PreconditionError("Measure is infinite")
        return self.value

    def __add__(self, other: Union["MeasureValue", Rational]) -> "MeasureValue":
        other = _as_measure(other)
        if self.is_infinite or other.is_infinite:
            return INFINITE
        return MeasureValue(self.value + other.value)

    __radd__ = __add__

    def _key(self) -> tuple[int, Fraction]:
        return (1, Fraction(0)) if self.value is None else (0, self.value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (MeasureValue, int, Fraction)):
            return self._key() == _as_measure(other)._key()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._key())

    def __lt__(self, other: Union["MeasureValue", Rational]) -> bool:
        return self._key() < _as_measure(other)._key()

    def __le__(self, other: Union["MeasureValue", Rational]) -> bool:
        return self._key() <= _as_measure(other)._key()

    def __gt__(self, other: Union["MeasureValue", Rational]) -> bool:
        return self._key() > _as_measure(other)._key()

    def __ge__(self, other: Union["MeasureValue", Rational]) -> bool:
        return self._key() >= _as_measure(other)._key()

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)

    def __repr__(self) -> str:
        return f"MeasureValue({self})"


INFINITE = MeasureValue(None)


def _as_measure(x: Union[MeasureValue, Rational]) -> MeasureValue:
    return x if isinstance(x, MeasureValue) else MeasureValue(Fraction(x))


def _normalize(pairs: Iterable[Sequence[Rational]]) -> tuple[Pair, ...]:
    cleaned = []
    for pair in pairs:
        if len(pair) != 2:
            raise MalformedInput(f"Interval needs two endpoints, got {pair!r}")
        p, q = Fraction(pair[0]), Fraction(pair[1])
        if p < 0:
            raise NegativeEndpoint(f"Endpoint {p} is negative")
        if q < p:
            raise MalformedInput(f"Interval [{p},{q}) is reversed")
        if p < q:
            cleaned.append((p, q))
    cleaned.sort()
    merged: list[Pair] = []
    for p, q in cleaned:
        if merged and p <= merged[-1][1]:
            if q > merged[-1][1]:
                merged[-1] = (merged[-1][0], q)
        else:
            merged.append((p, q))
    return tuple(merged)


def _sweep(a: tuple[Pair, ...], b: tuple[Pair, ...], keep: Callable[[bool, bool], bool]) -> tuple[Pair, ...]:
    points = sorted({x for iv in a + b for x in iv})
    out: list[Pair] = []
    ia = ib = 0
    for x, y in zip(points, points[1:]):
        while ia < len(a) and a[ia][1] <= x:
            ia += 1
        while ib < len(b) and b[ib][1] <= x:
            ib += 1
        in_a = ia < len(a) and a[ia][0] <= x
        in_b = ib < len(b) and b[ib][0] <= x
        if keep(in_a, in_b):
            if out and out[-1][1] == x:
                out[-1] = (out[-1][0], y)
            else:
                out.append((x, y))
    return tuple(out)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of half-open rational intervals [p, q) in [0, inf)

    Intervals are kept sorted, disjoint and maximal, so equality is
    structural.
    """

    intervals: tuple[Pair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def _trusted(cls, intervals: tuple[Pair, ...]) -> "IntervalSet":
        obj = object.__new__(cls)
        object.__setattr__(obj, "intervals", intervals)
        return obj

    @classmethod
    def of(cls, *pairs: Sequence[Rational]) -> "IntervalSet":
        return cls(tuple(pairs))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls._trusted(())

    @classmethod
    def union_all(cls, sets: Iterable["IntervalSet"]) -> "IntervalSet":
        """Union of many sets in one sort-and-merge pass"""
        pairs = [iv for s in sets for iv in s.intervals]
        return cls(tuple(pairs))

    # Basic queries
    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.intervals)

    def measure(self) -> Fraction:
        return sum((q - p for p, q in self.intervals), Fraction(0))

    @property
    def lo(self) -> Fraction:
        if not self.intervals:
            raise PreconditionError("Empty set has no lower end")
        return self.intervals[0][0]

    @property
    def hi(self) -> Fraction:
        if not self.intervals:
            raise PreconditionError("Empty set has no upper end")
        return self.intervals[-1][1]

    def contains(self, x: Rational) -> bool:
        x = Fraction(x)
        i = bisect_right(self.intervals, (x, float("inf"))) - 1
        return i >= 0 and self.intervals[i][0] <= x < self.intervals[i][1]

    def __contains__(self, x: Rational) -> bool:
        return self.contains(x)

    # Boolean algebra
    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(_sweep(self.intervals, other.intervals, lambda x, y: x or y))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(_sweep(self.intervals, other.intervals, lambda x, y: x and y))

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(_sweep(self.intervals, other.intervals, lambda x, y: x and not y))

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(_sweep(self.intervals, other.intervals, lambda x, y: x != y))

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference

    def issubset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty

    def intersects(self, other: "IntervalSet") -> bool:
        return not self.intersection(other).is_empty

    def translate(self, t: Rational) -> "IntervalSet":
        t = Fraction(t)
        if self.intervals and self.intervals[0][0] + t < 0:
            raise NegativeEndpoint(f"Shift by {t} leaves [0, inf)", shift=t)
        return IntervalSet._trusted(tuple((p + t, q + t) for p, q in self.intervals))

    def point_at(self, mass: Rational) -> Fraction:
        """Point reached after sweeping `mass` units of measure from the left"""
        mass = Fraction(mass)
        if mass < 0 or mass >= self.measure():
            raise PreconditionError(f"Mass {mass} outside [0, {self.measure()})")
        for p, q in self.intervals:
            if mass < q - p:
                return p + mass
            mass -= q - p
        raise PreconditionError("unreachable")  # pragma: no cover

    # Serialization
    def to_json(self) -> list[list[int]]:
        return [[p.numerator, p.denominator, q.numerator, q.denominator] for p, q in self.intervals]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[int]]) -> "IntervalSet":
        pairs = []
        for quad in data:
            if len(quad) != 4:
                raise MalformedInput(f"Expected [np, dp, nq, dq], got {quad!r}")
            np_, dp, nq, dq = (int(v) for v in quad)
            if dp == 0 or dq == 0:
                raise MalformedInput(f"Zero denominator in {quad!r}")
            pairs.append((Fraction(np_, dp), Fraction(nq, dq)))
        return cls(tuple(pairs))

    def __str__(self) -> str:
        if not self.intervals:
            return "∅"
        return " ∪ ".join(f"[{p},{q})" for p, q in self.intervals)


EMPTY = IntervalSet.empty()


def measure(s: IntervalSet) -> MeasureValue:
    """Lebesgue measure of a finite interval union"""
    return MeasureValue(s.measure())


def boolean(a: IntervalSet, b: IntervalSet, op: SetOperation) -> IntervalSet:
    """Exact set algebra on normalized interval sets"""
    if op == SetOperation.UNION:
        return a.union(b)
    if op == SetOperation.INTERSECT:
        return a.intersection(b)
    if op == SetOperation.DIFF:
        return a.difference(b)
    if op == SetOperation.SYMDIFF:
        return a.symmetric_difference(b)
    raise MalformedInput(f"Unknown set operation {op!r}")


def translate(s: IntervalSet, t: Rational) -> IntervalSet:
    return s.translate(t)


@dataclass(frozen=True)
class IntervalMap:
    """Disjoint labelled intervals with point lookup and range slicing"""

    starts: tuple[Fraction, ...]
    ends: tuple[Fraction, ...]
    labels: tuple[Hashable, ...]

    @classmethod
    def from_sets(cls, items: Iterable[tuple[Hashable, IntervalSet]]) -> "IntervalMap":
        entries = sorted(
            ((p, q, label) for label, s in items for p, q in s.intervals),
            key=lambda e: e[0],
        )
        for (_, q0, l0), (p1, _, l1) in zip(entries, entries[1:]):
            if q0 > p1:
                raise PreconditionError(f"Labelled sets {l0!r} and {l1!r} overlap at {p1}")
        return cls(
            tuple(e[0] for e in entries),
            tuple(e[1] for e in entries),
            tuple(e[2] for e in entries),
        )

    def __len__(self) -> int:
        return len(self.starts)

    def lookup(self, x: Rational) -> Optional[Hashable]:
        x = Fraction(x)
        i = bisect_right(self.starts, x) - 1
        if i >= 0 and x < self.ends[i]:
            return self.labels[i]
        return None

    def pieces(self, p: Fraction, q: Fraction) -> list[tuple[Fraction, Fraction, Optional[Hashable]]]:
        """Cover [p, q) by maximal pieces of constant label (None = unlabelled)"""
        n = len(self.starts)
        i = bisect_right(self.starts, p) - 1
        if i < 0 or self.ends[i] <= p:
            i += 1
        cur = p
        out = []
        while cur < q:
            if i < n and self.starts[i] <= cur:
                nxt = min(self.ends[i], q)
                label = self.labels[i]
                i += 1
            else:
                nxt = q if i >= n else min(self.starts[i], q)
                label = None
            if out and out[-1][2] == label and out[-1][1] == cur:
                out[-1] = (out[-1][0], nxt, label)
            else:
                out.append((cur, nxt, label))
            cur = nxt
        return out

    def split(self, s: IntervalSet) -> dict[Optional[Hashable], IntervalSet]:
        """Restrict `s` to each label; the None key collects unlabelled parts"""
        buckets: dict[Optional[Hashable], list[Pair]] = {}
        for p, q in s.intervals:
            for a, b, label in self.pieces(p, q):
                buckets.setdefault(label, []).append((a, b))
        return {label: IntervalSet(tuple(pairs)) for label, pairs in buckets.items()}
