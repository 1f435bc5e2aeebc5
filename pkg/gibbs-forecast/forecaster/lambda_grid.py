"""
Online choice of the inverse temperature.

At each date the lambda of the grid {2^k} ∩ {1..n} with the smallest
cumulative online quantile loss so far is used; ties go to the smaller lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Tuple

from losses import CumulativeLoss
from middleware.errors import DomainError
from middleware.log import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LambdaGrid:
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values or values[0] != 1.0:
            raise DomainError("lambda grid must start at 1")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError("lambda grid must be sorted and distinct")
        object.__setattr__(self, "values", values)

    @classmethod
    def for_sample_size(cls, n: int) -> "LambdaGrid":
        """Powers of two between 1 and n inclusive."""
        if n < 1:
            raise DomainError(f"lambda grid needs n >= 1, got {n}", n=n)
        values = []
        value = 1
        while value <= n:
            values.append(float(value))
            value *= 2
        return cls(tuple(values))

    @property
    def median(self) -> float:
        """Middle value; the lower middle for an even number of values."""
        return self.values[(len(self.values) - 1) // 2]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values


@dataclass(frozen=True)
class LambdaChoice:
    lam: float
    cold_start: bool = False


def select_lambda(grid: LambdaGrid, history: Mapping[float, CumulativeLoss]) -> LambdaChoice:
    """
    argmin over the grid of the cumulative online loss in ``history``.

    Lambdas missing from ``history`` or without any scored target are ignored.
    With nothing to compare, the grid median is returned as a cold start.
    """
    best = None
    best_total = float("inf")
    for lam in grid:
        cumulative = history.get(lam)
        if cumulative is None or cumulative.empty:
            continue
        if cumulative.total < best_total:
            best, best_total = lam, cumulative.total
    if best is None:
        logger.debug("lambda_cold_start", lam=grid.median, grid_size=len(grid))
        return LambdaChoice(lam=grid.median, cold_start=True)
    return LambdaChoice(lam=best)
