"""Enum definitions for operations, modes and verdicts"""

from enum import Enum


class SetOperation(str, Enum):
    """Boolean operations on interval sets"""

    UNION = "union"
    INTERSECT = "intersect"
    DIFF = "diff"
    SYMDIFF = "symdiff"


class UniformizeMode(str, Enum):
    """Uniformizer construction mode"""

    INITIAL = "initial"  # rename bad columns to the infinite atom
    REFINING = "refining"  # copy good names inside a coarser partition


class DonorPolicy(str, Enum):
    """Which good column lends its name to a bad one in REFINING mode"""

    LARGEST = "largest"  # largest base measure, lowest index on ties
    FIRST = "first"  # lowest column index


class OrbitRegime(str, Enum):
    """Verdict of the bounded-orbit detector"""

    DETECTED = "detected"
    UNBOUNDED = "unbounded"


class CommandName(str, Enum):
    """CLI subcommands"""

    BUILD_TOWER = "build-tower"
    REFINE_TOWER = "refine-tower"
    UNIFORMITY = "uniformity"
    UNIFORMIZE = "uniformize"
    SUBSHIFT = "subshift"
    RADON_CHECK = "radon-check"
    EXPORT_BRATTELI = "export-bratteli"
    STATS = "stats"
    PRESETS = "presets"


class RunStatus(str, Enum):
    """Outcome recorded in the run ledger"""

    SUCCESS = "success"
    PRECONDITION = "precondition"
    DEPTH_EXHAUSTED = "depth_exhausted"
    FAILED = "failed"
