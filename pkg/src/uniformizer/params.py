"""Budgets, tolerances and tower floors of the uniformizer steps"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from src.config.settings import settings
from src.errors import PreconditionError
from src.partitions.partition import Partition
from src.sets.intervals import Rational


@dataclass(frozen=True)
class UniformizerParams:
    """Per-step schedule for a run with total budget `epsilon`

    Step n uses δ_n = ε/2^(n+1) both as the block-distribution tolerance
    and as its d-budget, so the increments telescope below ε/2.
    """

    epsilon: Fraction
    alphabet_size: int
    floor_growth: int = 4
    max_escalations: int = 6
    first_floor: int = 4

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise PreconditionError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.floor_growth < 2:
            raise PreconditionError("floor_growth must be at least 2")

    def delta(self, n: int) -> Fraction:
        return self.epsilon / 2 ** (n + 1)

    def block_constant(self, n: int) -> int:
        """c_1 = 1, c_n = (#α0)^(2n-1)"""
        return 1 if n == 1 else self.alphabet_size ** (2 * n - 1)

    def certified_target(self, n: int) -> Fraction:
        return self.epsilon / (2**n * self.block_constant(n))

    def floor(self, n: int) -> int:
        """Height floor N_n of the step-n tower before escalation"""
        return self.first_floor if n == 1 else 4 ** (n + 1)

    def escalated_floor(self, n: int, escalation: int) -> int:
        return self.floor(n) * self.floor_growth**escalation

    def to_json(self, steps: int) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "alphabet_size": self.alphabet_size,
            "floor_growth": self.floor_growth,
            "max_escalations": self.max_escalations,
            "schedule": [
                {
                    "step": n,
                    "delta": str(self.delta(n)),
                    "c": self.block_constant(n),
                    "certified_target": str(self.certified_target(n)),
                    "floor": self.floor(n),
                }
                for n in range(1, steps + 1)
            ],
        }


def default_params(epsilon: Rational, alpha0: Partition, max_escalations: Optional[int] = None) -> UniformizerParams:
    return UniformizerParams(
        epsilon=Fraction(epsilon),
        alphabet_size=alpha0.size,
        floor_growth=settings.floor_growth,
        max_escalations=settings.max_escalations if max_escalations is None else max_escalations,
    )
