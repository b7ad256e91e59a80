"""Pointwise Lorenz and Zenga dominance.

Dominance here means *more unequal*: X dominates Y when its Lorenz curve lies
on or below Y's everywhere, and, equivalently, when its uniformity-ratio curve
lies on or below Y's. The uniformity ratio is a strictly increasing function of
L(p) at fixed p, so both orderings give the same verdict; :func:`equivalence_check`
confirms that numerically.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum

from .curves import lorenz, open_grid, uniformity_ratio
from .distributions import Distribution, EmpiricalSample
from .exceptions import DegenerateTailError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_GRID: int = 1001
MIN_GRID: int = 10
# Per-point differences within this band count as ties.
POINT_TOLERANCE: float = 1e-12
# Dominance needs at least one point separated by more than this.
STRICT_TOLERANCE: float = 1e-9


class Relation(StrEnum):
    FIRST_DOMINATES = "first_dominates"
    SECOND_DOMINATES = "second_dominates"
    EQUAL = "equal"
    CROSSING = "crossing"


@dataclass(frozen=True)
class DominanceVerdict:
    relation: Relation
    max_gap: float
    crossings: tuple[float, ...]
    grid_size: int
    skipped: int = 0

    def as_dict(self) -> dict[str, object]:
        return {
            "relation": str(self.relation),
            "max_gap": self.max_gap,
            "crossings": list(self.crossings),
            "grid_size": self.grid_size,
            "skipped": self.skipped,
        }


def comparison_ranks(x: Distribution, y: Distribution, grid_size: int) -> list[float]:
    """Uniform grid plus the interior lattice points of empirical inputs."""
    if grid_size < MIN_GRID:
        raise DomainError(
            f"dominance grid needs at least {MIN_GRID} points, got {grid_size}"
        )
    ranks = set(open_grid(grid_size))
    for d in (x, y):
        if isinstance(d, EmpiricalSample):
            ranks.update(float(p) for p in d.lattice[1:-1] if 0.0 < p < 1.0)
    return sorted(ranks)


def _sign(gap: float) -> int:
    if gap > POINT_TOLERANCE:
        return 1
    if gap < -POINT_TOLERANCE:
        return -1
    return 0


def verdict_from_gaps(
    ranks: Sequence[float],
    gaps: Sequence[float],
    skipped: int = 0,
) -> DominanceVerdict:
    """Classify ``curve_Y - curve_X`` sampled at *ranks*.

    Positive gaps mean X's curve is lower, i.e. X is more unequal. Sign changes
    between consecutive non-tied points become crossings, located by linear
    interpolation.
    """
    crossings: list[float] = []
    previous: tuple[float, float, int] | None = None
    seen: set[int] = set()
    for p, gap in zip(ranks, gaps, strict=True):
        sign = _sign(gap)
        if sign == 0:
            continue
        seen.add(sign)
        if previous is not None and previous[2] != sign:
            p0, g0, _ = previous
            crossings.append(p0 + (p - p0) * g0 / (g0 - gap))
        previous = (p, gap, sign)

    max_gap = max((abs(g) for g in gaps), default=0.0)
    if crossings:
        relation = Relation.CROSSING
    elif max_gap <= STRICT_TOLERANCE or not seen:
        relation = Relation.EQUAL
    elif 1 in seen:
        relation = Relation.FIRST_DOMINATES
    else:
        relation = Relation.SECOND_DOMINATES
    return DominanceVerdict(relation, max_gap, tuple(crossings), len(gaps), skipped)


def _compare(
    curve: Callable[[Distribution, float], float],
    x: Distribution,
    y: Distribution,
    grid_size: int,
) -> DominanceVerdict:
    ranks: list[float] = []
    gaps: list[float] = []
    skipped = 0
    for p in comparison_ranks(x, y, grid_size):
        try:
            gap = curve(y, p) - curve(x, p)
        except DegenerateTailError as exc:
            skipped += 1
            logger.warning(f"skipping p={p:.6g}: {exc}")
            continue
        ranks.append(p)
        gaps.append(gap)
    return verdict_from_gaps(ranks, gaps, skipped)


def lorenz_dominance(
    x: Distribution,
    y: Distribution,
    grid_size: int = DEFAULT_GRID,
) -> DominanceVerdict:
    verdict = _compare(lorenz, x, y, grid_size)
    logger.debug(f"lorenz {x.describe()} vs {y.describe()}: {verdict.relation}")
    return verdict


def zenga_dominance(
    x: Distribution,
    y: Distribution,
    grid_size: int = DEFAULT_GRID,
) -> DominanceVerdict:
    verdict = _compare(uniformity_ratio, x, y, grid_size)
    logger.debug(f"zenga {x.describe()} vs {y.describe()}: {verdict.relation}")
    return verdict


def equivalence_check(
    x: Distribution,
    y: Distribution,
    grid_size: int = DEFAULT_GRID,
) -> bool:
    """Whether the Lorenz and Zenga orderings agree on (x, y).

    Crossing locations may differ between the two curves; the number of
    crossings must agree in parity.
    """
    return verdicts_agree(
        lorenz_dominance(x, y, grid_size), zenga_dominance(x, y, grid_size)
    )


def verdicts_agree(first: DominanceVerdict, second: DominanceVerdict) -> bool:
    if first.relation is not second.relation:
        return False
    return len(first.crossings) % 2 == len(second.crossings) % 2
