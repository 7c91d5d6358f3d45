"""Rank-one cutting-and-stacking specifications and the built-in presets"""

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from loguru import logger

from src.config.settings import settings
from src.errors import MalformedInput, UnknownPreset
from src.sets.intervals import IntervalSet


@dataclass(frozen=True)
class StageRule:
    """How one stage column is cut and which spacers sit on each subcolumn"""

    cuts: int
    spacers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "spacers", tuple(int(s) for s in self.spacers))
        if self.cuts < 2:
            raise MalformedInput(f"A stage needs at least 2 cuts, got {self.cuts}")
        if len(self.spacers) != self.cuts:
            raise MalformedInput(
                f"Stage with {self.cuts} cuts needs {self.cuts} spacer counts, got {len(self.spacers)}"
            )
        if any(s < 0 for s in self.spacers):
            raise MalformedInput("Spacer counts must be nonnegative")


@dataclass(frozen=True)
class RankOneSpec:
    """A rank-one system: a base interval and the rule of every stage transition

    Stage 1 is the base itself; stage k+1 is obtained from stage k by
    `stages[k-1]`.
    """

    base: IntervalSet
    stages: tuple[StageRule, ...]
    name: str = "custom"
    infinite_measure: bool = False

    def __post_init__(self):
        if len(self.base) != 1:
            raise MalformedInput("The stage-1 base must be a single interval")

    @property
    def max_stage(self) -> int:
        return len(self.stages) + 1

    def heights(self, depth: int) -> list[int]:
        """Column heights h_1..h_depth"""
        heights = [1]
        for rule in self.stages[: depth - 1]:
            heights.append(rule.cuts * heights[-1] + sum(rule.spacers))
        return heights

    def widths(self, depth: int) -> list[Fraction]:
        """Level widths w_1..w_depth"""
        widths = [self.base.measure()]
        for rule in self.stages[: depth - 1]:
            widths.append(widths[-1] / rule.cuts)
        return widths

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "infinite_measure": self.infinite_measure,
            "base": self.base.to_json()[0],
            "stages": [{"cuts": r.cuts, "spacers": list(r.spacers)} for r in self.stages],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RankOneSpec":
        try:
            base = data["base"]
            quads = base if base and isinstance(base[0], list) else [base]
            stages = tuple(StageRule(int(s["cuts"]), tuple(s["spacers"])) for s in data["stages"])
        except (KeyError, TypeError, IndexError) as e:
            raise MalformedInput(f"Malformed spec file: {e}") from e
        return cls(
            base=IntervalSet.from_json(quads),
            stages=stages,
            name=str(data.get("name", "custom")),
            infinite_measure=bool(data.get("infinite_measure", False)),
        )


def load_spec_file(path: Path) -> RankOneSpec:
    """Load a spec from the JSON spec-file format"""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"Cannot read spec file {path}: {e}") from e
    return RankOneSpec.from_json(data)


# Presets
def _generated(name: str, depth: int, rule: Callable[[int], StageRule]) -> RankOneSpec:
    stages = []
    height = 1
    for _ in range(depth - 1):
        stage = rule(height)
        stages.append(stage)
        height = stage.cuts * height + sum(stage.spacers)
    return RankOneSpec(
        base=IntervalSet.of((0, 1)),
        stages=tuple(stages),
        name=name,
        infinite_measure=True,
    )


def _hajian_kakutani(h: int) -> StageRule:
    return StageRule(2, (0, 2 * h))


def _chacon_infinite(h: int) -> StageRule:
    return StageRule(3, (0, 1, h))


PRESETS: dict[str, tuple[str, Callable[[int], StageRule]]] = {
    "hajian-kakutani": (
        "Hajian-Kakutani skyscraper: cut in 2, put 2h_k spacers on the right half; "
        "h_k = 4^(k-1), used measure 2^(k-1)",
        _hajian_kakutani,
    ),
    "chacon-infinite": (
        "Infinite Chacon-type system: cut in 3, spacers [0, 1, h_k]; "
        "h_(k+1) = 4h_k + 1, used measure grows like (4/3)^k",
        _chacon_infinite,
    ),
}


def list_presets() -> list[dict[str, str]]:
    """Catalog of built-in systems, in a stable order"""
    return [{"name": name, "description": desc} for name, (desc, _) in PRESETS.items()]


def preset(name: str, depth: Optional[int] = None) -> RankOneSpec:
    """Build a named preset with stage rules up to `depth` (default: max depth)"""
    if name not in PRESETS:
        raise UnknownPreset(f"Unknown preset '{name}'", known=", ".join(PRESETS))
    depth = depth or settings.max_depth
    logger.debug(f"Generating preset {name} to depth {depth}")
    return _generated(name, depth, PRESETS[name][1])


@dataclass(frozen=True)
class MeasureGrowth:
    """Used measure per stage and a divergence diagnostic"""

    measures: tuple[Fraction, ...]
    declared_infinite: bool

    @property
    def increments(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.measures, self.measures[1:]))

    @property
    def looks_divergent(self) -> bool:
        """Increments positive and not shrinking over the last three stages"""
        tail = self.increments[-3:]
        return bool(tail) and all(x > 0 for x in tail) and all(a <= b for a, b in zip(tail, tail[1:]))


def measure_growth(spec: RankOneSpec, depth: int) -> MeasureGrowth:
    measures = tuple(h * w for h, w in zip(spec.heights(depth), spec.widths(depth)))
    growth = MeasureGrowth(measures, spec.infinite_measure)
    if growth.declared_infinite and not growth.looks_divergent:
        logger.warning(f"{spec.name} is declared infinite but its measure growth looks bounded")
    return growth
