"""Lorenz-type curves and the Gini, generalized Gini, Bonferroni and Zenga indices.

Curves are evaluated from the partial integrals of the quantile function, so
for an :class:`~welfarelens.distributions.EmpiricalSample` they follow the
piecewise-linear Lorenz embedding between lattice points.

Indices on empirical samples come in two flavours, selected by
:class:`Estimator`:

* ``discrete``: the finite-sample estimators (pairwise Gini, the
  ``1/(n-1)`` Bonferroni average of lower-group means, the ``1/n`` Zenga average
  of lower/upper mean ratios with ``M⁺ = x_max`` at the top rank);
* ``embedding``: the curve definitions integrated over the piecewise-linear
  embedding. This is the flavour that satisfies the welfare identities exactly.

For the Gini family the two coincide.
"""

import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

import numpy as np

from .distributions import Distribution, EmpiricalSample
from .exceptions import DegenerateTailError, DomainError
from .quadrature import DEFAULT_REL_TOL, Integrand, integrate, integrate_cells

logger = logging.getLogger(__name__)


class CurveKind(StrEnum):
    LORENZ = "lorenz"
    GENERALIZED_LORENZ = "generalized_lorenz"
    BONFERRONI_CURVE = "bonferroni_curve"
    UNIFORMITY_RATIO = "uniformity_ratio"
    ZENGA_INEQUALITY = "zenga_inequality"


class Estimator(StrEnum):
    DISCRETE = "discrete"
    EMBEDDING = "embedding"


class CurvePoint(NamedTuple):
    p: float
    value: float


@dataclass(frozen=True)
class CurveGrid:
    """A curve sampled at strictly increasing ranks in (0, 1)."""

    kind: CurveKind
    points: tuple[CurvePoint, ...]

    def as_records(self) -> list[dict[str, float]]:
        return [{"p": point.p, "value": point.value} for point in self.points]


@dataclass(frozen=True)
class IndexReport:
    gini: float
    gini_k: Mapping[float, float]
    bonferroni: float
    zenga: float
    mean: float
    estimator: Estimator = Estimator.DISCRETE

    def as_dict(self) -> dict[str, object]:
        return {
            "gini": self.gini,
            "gini_k": {f"{k:g}": value for k, value in self.gini_k.items()},
            "bonferroni": self.bonferroni,
            "zenga": self.zenga,
            "mean": self.mean,
        }


def _check_rank(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")


def _unit_interval(value: float) -> float:
    """Clip roundoff excursions of an index outside [0, 1]."""
    return min(max(value, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


def lorenz(d: Distribution, p: float) -> float:
    """Share of total income held by the poorest fraction p."""
    _check_rank(p)
    share = d.lower_integral(p) / d.mean()
    return min(max(share, 0.0), p)


def generalized_lorenz(d: Distribution, p: float) -> float:
    _check_rank(p)
    return d.lower_integral(p)


def bonferroni_curve(d: Distribution, p: float) -> float:
    return lorenz(d, p) / p


def uniformity_ratio(d: Distribution, p: float) -> float:
    """Mean income below rank p divided by mean income above it."""
    _check_rank(p)
    upper = d.upper_integral(p)
    if upper <= 0.0:
        raise DegenerateTailError(
            f"degenerate tail: the group above p={p!r} holds no income"
        )
    ratio = (d.lower_integral(p) / p) / (upper / (1.0 - p))
    return min(max(ratio, 0.0), 1.0)


def zenga_inequality_curve(d: Distribution, p: float) -> float:
    return 1.0 - uniformity_ratio(d, p)


def lorenz_from_uniformity(z: float, p: float) -> float:
    """Recover L(p) from the uniformity ratio: ``z p / (1 - p + p z)``."""
    _check_rank(p)
    return z * p / (1.0 - p + p * z)


_CURVES = {
    CurveKind.LORENZ: lorenz,
    CurveKind.GENERALIZED_LORENZ: generalized_lorenz,
    CurveKind.BONFERRONI_CURVE: bonferroni_curve,
    CurveKind.UNIFORMITY_RATIO: uniformity_ratio,
    CurveKind.ZENGA_INEQUALITY: zenga_inequality_curve,
}


def curve_value(d: Distribution, kind: CurveKind, p: float) -> float:
    return _CURVES[kind](d, p)


def open_grid(n_points: int) -> list[float]:
    """The open uniform grid ``i / (n + 1)`` for ``i = 1..n``."""
    if n_points < 1:
        raise DomainError(f"grid needs at least 1 point, got {n_points}")
    return [i / (n_points + 1) for i in range(1, n_points + 1)]


def curve_grid(d: Distribution, kind: CurveKind, n_points: int) -> CurveGrid:
    evaluate = _CURVES[kind]
    points = tuple(CurvePoint(p, evaluate(d, p)) for p in open_grid(n_points))
    return CurveGrid(kind, points)


# ---------------------------------------------------------------------------
# Indices
# ---------------------------------------------------------------------------


def integrate_over_ranks(
    f: Integrand,
    d: Distribution,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Integrate over (0, 1), cell by cell when the curve has lattice kinks."""
    if isinstance(d, EmpiricalSample):
        return integrate_cells(f, d.lattice.tolist(), rel_tol).value
    return integrate(f, 0.0, 1.0, rel_tol).value


def _sample_gini_k(sample: EmpiricalSample, k: float) -> float:
    # Mass of (k+1)(1-p)^k over each lattice cell, times the income held there.
    survivors = (1.0 - sample.lattice) ** (k + 1.0)
    masses = survivors[:-1] - survivors[1:]
    welfare = math.fsum((masses * sample.values).tolist())
    return 1.0 - welfare / sample.mean()


def gini(d: Distribution, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Twice the area between the equality line and the Lorenz curve.

    On samples this is the weighted pairwise-difference estimator
    ``ΣΣ wᵢwⱼ|xᵢ - xⱼ| / (2 W² μ)``, evaluated in O(n) on sorted data.
    """
    if isinstance(d, EmpiricalSample):
        below = d.lattice[:-1]
        above = d.lattice[1:]
        shares = above - below
        terms = shares * d.values * (below + above - 1.0)
        value = math.fsum(terms.tolist()) / d.mean()
    else:
        gap = Integrand(lambda p: p - lorenz(d, p))
        value = 2.0 * integrate_over_ranks(gap, d, rel_tol)
    logger.debug(f"gini({d.describe()}) = {value!r}")
    return _unit_interval(value)


def gini_generalized(
    d: Distribution,
    k: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Rank-weighted Gini ``G_k``, with ``G_1`` the ordinary Gini."""
    if not k >= 1.0:
        raise DomainError(f"generalized Gini needs k >= 1, got {k}")
    if isinstance(d, EmpiricalSample):
        value = _sample_gini_k(d, k)
    else:
        weight = k * (k + 1.0)
        area = integrate_over_ranks(
            Integrand(lambda p: lorenz(d, p) * (1.0 - p) ** (k - 1.0)), d, rel_tol
        )
        value = 1.0 - weight * area
    return _unit_interval(value)


def _bonferroni_discrete(sample: EmpiricalSample) -> float:
    n = sample.size
    if n == 1:
        return 0.0
    lower_means = np.cumsum(sample.values)[:-1] / np.arange(1, n)
    return 1.0 - math.fsum(lower_means.tolist()) / ((n - 1) * sample.mean())


def _bonferroni_embedding(sample: EmpiricalSample) -> float:
    # ∫ C(p)/p over each cell where C is linear; the first cell is C = x₁p.
    lattice = sample.lattice
    partial = sample.partial_sums
    values = sample.values
    pieces = [float(values[0] * lattice[1])]
    for i in range(1, sample.size):
        lo, hi, x = lattice[i], lattice[i + 1], values[i]
        if hi <= lo:
            continue
        intercept = partial[i] - x * lo
        pieces.append(float(intercept * math.log(hi / lo) + x * (hi - lo)))
    return 1.0 - math.fsum(pieces) / sample.mean()


def bonferroni(
    d: Distribution,
    estimator: Estimator = Estimator.DISCRETE,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Average over ranks of ``1 - L(p)/p``.

    Weighted samples always use the embedding integral, which has no
    finite-sample counterpart of the ``1/(n-1)`` average.
    """
    if isinstance(d, EmpiricalSample):
        if estimator is Estimator.DISCRETE and d.is_unweighted:
            value = _bonferroni_discrete(d)
        else:
            value = _bonferroni_embedding(d)
    else:
        shortfall = Integrand(lambda p: 1.0 - bonferroni_curve(d, p))
        value = integrate_over_ranks(shortfall, d, rel_tol)
    return _unit_interval(value)


def _zenga_discrete(sample: EmpiricalSample) -> float:
    shares = np.diff(sample.lattice)
    ranks = sample.lattice[1:]
    lower_means = sample.partial_sums[1:] / ranks
    upper_means = np.empty_like(lower_means)
    upper_means[:-1] = sample.suffix_sums[1:-1] / (1.0 - ranks[:-1])
    upper_means[-1] = sample.values[-1]
    gaps = shares * (1.0 - lower_means / upper_means)
    return math.fsum(gaps.tolist())


def zenga_index(
    d: Distribution,
    estimator: Estimator = Estimator.DISCRETE,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Integral of the inequality curve ``1 - M⁻(p)/M⁺(p)``.

    Oriented so that the degenerate distribution scores 0 and welfare is
    ``μ(1 - Z)``.
    """
    if isinstance(d, EmpiricalSample) and estimator is Estimator.DISCRETE:
        value = _zenga_discrete(d)
    else:
        curve = Integrand(lambda p: zenga_inequality_curve(d, p))
        value = integrate_over_ranks(curve, d, rel_tol)
    return _unit_interval(value)


def index_report(
    d: Distribution,
    ks: Iterable[float] = (2.0,),
    estimator: Estimator = Estimator.DISCRETE,
    rel_tol: float = DEFAULT_REL_TOL,
) -> IndexReport:
    report = IndexReport(
        gini=gini(d, rel_tol),
        gini_k={k: gini_generalized(d, k, rel_tol) for k in ks},
        bonferroni=bonferroni(d, estimator, rel_tol),
        zenga=zenga_index(d, estimator, rel_tol),
        mean=d.mean(),
        estimator=estimator,
    )
    logger.debug(f"index report for {d.describe()}: {report}")
    return report
