"""Exact interval-set algebra"""

from .intervals import (
    EMPTY,
    INFINITE,
    IntervalMap,
    IntervalSet,
    MeasureValue,
    boolean,
    measure,
    translate,
)

__all__ = [
    "EMPTY",
    "INFINITE",
    "IntervalMap",
    "IntervalSet",
    "MeasureValue",
    "boolean",
    "measure",
    "translate",
]
