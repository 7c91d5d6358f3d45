"""Flag parsing and deterministic report writers"""

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from src.config.settings import settings
from src.errors import MalformedInput
from src.partitions.partition import Partition
from src.sets.intervals import IntervalSet
from src.stats.radon import Cylinder


def parse_rational(text: str) -> Fraction:
    """'p/q' or an integer"""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise MalformedInput(f"Not a rational: {text!r}") from e


def parse_interval_set(text: str) -> IntervalSet:
    """'p/q:r/s,...' -> union of [p/q, r/s)"""
    pairs = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        if chunk.count(":") != 1:
            raise MalformedInput(f"Interval must look like p/q:r/s, got {chunk!r}")
        lo, hi = chunk.split(":")
        pairs.append((parse_rational(lo), parse_rational(hi)))
    return IntervalSet(tuple(pairs))


def parse_partition(text: str) -> Partition:
    """Finite atoms separated by ';'"""
    atoms = [parse_interval_set(chunk) for chunk in text.split(";") if chunk.strip()]
    if not atoms:
        raise MalformedInput("A partition needs at least one finite atom")
    return Partition(tuple(atoms))


def _symbols(text: str) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(s) for s in text.split("-"))
    except ValueError as e:
        raise MalformedInput(f"Symbols must be integers separated by '-', got {text!r}") from e


def parse_cylinders(text: str) -> list[Cylinder]:
    """'u.v' with '-'-separated symbols, cylinders separated by ','"""
    cylinders = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        if chunk.count(".") != 1:
            raise MalformedInput(f"Cylinder must look like u.v, got {chunk!r}")
        u, v = chunk.split(".")
        word = _symbols(u) + _symbols(v)
        if not word:
            raise MalformedInput("Empty cylinder word")
        cylinders.append(Cylinder.dotted(_symbols(u), _symbols(v)))
    return cylinders


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise MalformedInput(f"Expected comma-separated integers, got {text!r}") from e


def to_plain(value: Any) -> Any:
    """JSON-ready form: Fractions as 'p/q' strings, tuples as lists"""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_plain(v) for v in value]
        return sorted(items, key=repr) if isinstance(value, (set, frozenset)) else items
    return value


def dumps(data: Any) -> str:
    return json.dumps(to_plain(data), indent=2, sort_keys=True, ensure_ascii=False)


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data) + "\n", encoding="utf-8")
    return path


def write_jsonl(path: Path, records: Iterable[Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(to_plain(record), sort_keys=True) + "\n")
    return path


def write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: to_plain(v) for k, v in row.items()})
    return path


def decimal_text(value: Fraction, precision: int | None = None) -> str:
    """Fixed-point expansion of an exact rational, rounded half away from zero"""
    precision = settings.plot_precision if precision is None else precision
    scale = 10**precision
    scaled = abs(value) * scale
    digits = int(scaled + Fraction(1, 2))
    sign = "-" if value < 0 and digits else ""
    whole, frac = divmod(digits, scale)
    return f"{sign}{whole}.{frac:0{precision}d}" if precision else f"{sign}{whole}"


def write_plot_data(path: Path, points: Iterable[tuple[int, Fraction]], precision: int | None = None) -> Path:
    """Two-column 'x y' file for external plotting"""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# N max_deviation"] + [f"{x} {decimal_text(y, precision)}" for x, y in points]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
