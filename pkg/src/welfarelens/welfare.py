"""Rank-dependent welfare functions and their weight functions.

Each inequality index I induces a welfare level ``W = μ(1 - I)`` which can
also be written as ``∫₀¹ F⁻¹(p) ν(p) dp`` for a weight function ν that depends
on the rank only (Gini family, Bonferroni) or also on the distribution
(Zenga). The Zenga weight splits into a rank-only part and a penalization:

    ν_Z(p) = ν*_Z(p) · β_Z(p)
    ν*_Z(p) = (-ln p + p - 1) / (1 - p)²
    β_Z(p) = ((1 - p) / (1 - L(p)))² = (μ / M⁺(p))²

:func:`certify` checks the analytic properties of these weights numerically
and returns one :class:`PropositionCertificate` per property.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

from . import VERBOSE
from .curves import (
    Estimator,
    bonferroni,
    gini,
    gini_generalized,
    integrate_over_ranks,
    open_grid,
    zenga_index,
)
from .distributions import Distribution
from .exceptions import DegenerateTailError, DomainError, WelfareLensError
from .quadrature import DEFAULT_REL_TOL, Integrand, Singularity, integrate

logger = logging.getLogger(__name__)

# Below this distance from 1 the Zenga rank weight is summed as a series.
_SERIES_CUTOFF: float = 1e-4
_SERIES_LAST_TERM: int = 8

CERTIFICATE_GRID: int = 10_000
# (-5 + √33) / 4: h(p) >= 0 below this rank.
CONVEXITY_KNEE: float = (-5.0 + math.sqrt(33.0)) / 4.0
# Distance from 0 and from 1 at which the boundary term is sampled.
BOUNDARY_OFFSET: float = 1e-8
# Distance from 1 at which the top-rank limits of β_Z and ν_Z are read.
_TOP_RANK_GAP: float = 1e-12


class WelfareFamily(StrEnum):
    GINI = "gini"
    GINI_K = "gini_k"
    BONFERRONI = "bonferroni"
    ZENGA = "zenga"


class WeightVariant(StrEnum):
    NU = "nu"
    NU_STAR = "nu_star"
    BETA = "beta"


@dataclass(frozen=True)
class WelfareKind:
    """A welfare family; ``k`` only matters for the generalized Gini."""

    family: WelfareFamily
    k: float = 2.0

    def __post_init__(self) -> None:
        if self.family is WelfareFamily.GINI_K and not self.k >= 1.0:
            raise DomainError(f"generalized Gini needs k >= 1, got {self.k}")

    @property
    def label(self) -> str:
        if self.family is WelfareFamily.GINI_K:
            return f"gini_k(k={self.k:g})"
        return str(self.family)


GINI = WelfareKind(WelfareFamily.GINI)
BONFERRONI = WelfareKind(WelfareFamily.BONFERRONI)
ZENGA = WelfareKind(WelfareFamily.ZENGA)


def all_kinds(k: float = 2.0) -> tuple[WelfareKind, ...]:
    return (GINI, WelfareKind(WelfareFamily.GINI_K, k), BONFERRONI, ZENGA)


class WeightPoint(NamedTuple):
    p: float
    weight: float


@dataclass(frozen=True)
class WeightProfile:
    kind: WelfareKind
    variant: WeightVariant
    points: tuple[WeightPoint, ...]
    integral: float


class CertificateStatus(StrEnum):
    PASS = "pass"
    FAIL = "fail"


@dataclass(frozen=True)
class PropositionCertificate:
    """Outcome of one numerical check; passes iff ``residual < tolerance``."""

    id: str
    status: CertificateStatus
    residual: float
    tolerance: float
    description: str

    @property
    def passed(self) -> bool:
        return self.status is CertificateStatus.PASS

    def as_dict(self) -> dict[str, object]:
        return {
            "id": self.id,
            "status": str(self.status),
            "residual": self.residual,
            "description": self.description,
        }


class IdentityRow(NamedTuple):
    kind: WelfareKind
    index: float
    welfare: float
    welfare_direct: float
    relative_gap: float


def _check_rank(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")


# ---------------------------------------------------------------------------
# Weight functions
# ---------------------------------------------------------------------------


def weight_gini(p: float) -> float:
    _check_rank(p)
    return 2.0 * (1.0 - p)


def weight_gini_k(p: float, k: float) -> float:
    _check_rank(p)
    if not k >= 1.0:
        raise DomainError(f"generalized Gini needs k >= 1, got {k}")
    return (k + 1.0) * (1.0 - p) ** k


def weight_bonferroni(p: float) -> float:
    _check_rank(p)
    return -math.log(p)


def weight_zenga_star(p: float) -> float:
    """Rank-only Zenga weight; tends to 1/2 at p -> 1 and to +∞ at p -> 0."""
    _check_rank(p)
    q = 1.0 - p
    if q < _SERIES_CUTOFF:
        # (-ln(1-q) - q) / q² = Σ_{k>=2} q^(k-2) / k
        return math.fsum(q ** (k - 2) / k for k in range(2, _SERIES_LAST_TERM + 1))
    return (-math.log(p) - q) / (q * q)


def beta_zenga(d: Distribution, p: float) -> float:
    """Penalization ``(μ / M⁺(p))²``, in (0, 1] and nonincreasing in p."""
    _check_rank(p)
    upper = d.upper_integral(p)
    if upper <= 0.0:
        raise DegenerateTailError(
            f"degenerate tail: the group above p={p!r} holds no income"
        )
    ratio = d.mean() * (1.0 - p) / upper
    return min(ratio * ratio, 1.0)


def beta_zenga_limit_at_one(d: Distribution) -> float:
    """``lim β_Z(p)`` as p -> 1: ``(μ / max)²`` when bounded, else 0."""
    if not d.is_bounded:
        return 0.0
    return (d.mean() / d.support_max) ** 2


def weight_zenga(d: Distribution, p: float) -> float:
    return weight_zenga_star(p) * beta_zenga(d, p)


def weight_function(
    kind: WelfareKind,
    d: Distribution | None = None,
    variant: WeightVariant = WeightVariant.NU,
) -> Integrand:
    """The requested weight as an :class:`Integrand` with its endpoint hints."""
    if variant is not WeightVariant.NU and kind.family is not WelfareFamily.ZENGA:
        raise DomainError(f"variant {variant} exists only for the zenga weights")
    match kind.family:
        case WelfareFamily.GINI:
            return Integrand(weight_gini)
        case WelfareFamily.GINI_K:
            k = kind.k
            return Integrand(lambda p: weight_gini_k(p, k))
        case WelfareFamily.BONFERRONI:
            return Integrand(weight_bonferroni, Singularity.LOG_AT_ZERO)
        case WelfareFamily.ZENGA:
            pass
    if variant is WeightVariant.NU_STAR:
        hints = Singularity.LOG_AT_ZERO | Singularity.VANISHING_AT_ONE
        return Integrand(weight_zenga_star, hints)
    if d is None:
        raise DomainError(f"zenga {variant} weights need a distribution")
    if variant is WeightVariant.BETA:
        return Integrand(lambda p: beta_zenga(d, p))
    return Integrand(lambda p: weight_zenga(d, p), Singularity.LOG_AT_ZERO)


def _weight_integral(
    integrand: Integrand,
    d: Distribution | None,
    rel_tol: float,
) -> float:
    """Integrate a weight; *d* is given only when the weight depends on it."""
    if d is None:
        return integrate(integrand, 0.0, 1.0, rel_tol).value
    return integrate_over_ranks(integrand, d, rel_tol)


def depends_on_distribution(kind: WelfareKind, variant: WeightVariant) -> bool:
    return kind.family is WelfareFamily.ZENGA and variant is not WeightVariant.NU_STAR


def weight_profile(
    kind: WelfareKind,
    variant: WeightVariant = WeightVariant.NU,
    n_points: int = 99,
    d: Distribution | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> WeightProfile:
    integrand = weight_function(kind, d, variant)
    points = tuple(WeightPoint(p, integrand.func(p)) for p in open_grid(n_points))
    owner = d if depends_on_distribution(kind, variant) else None
    integral = _weight_integral(integrand, owner, rel_tol)
    logger.debug(f"∫ {kind.label} {variant} = {integral!r}")
    return WeightProfile(kind, variant, points, integral)


# ---------------------------------------------------------------------------
# Welfare
# ---------------------------------------------------------------------------


def inequality_index(
    d: Distribution,
    kind: WelfareKind,
    estimator: Estimator = Estimator.DISCRETE,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    match kind.family:
        case WelfareFamily.GINI:
            return gini(d, rel_tol)
        case WelfareFamily.GINI_K:
            return gini_generalized(d, kind.k, rel_tol)
        case WelfareFamily.BONFERRONI:
            return bonferroni(d, estimator, rel_tol)
        case WelfareFamily.ZENGA:
            return zenga_index(d, estimator, rel_tol)


def welfare(
    d: Distribution,
    kind: WelfareKind,
    estimator: Estimator = Estimator.DISCRETE,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """``μ(1 - I)`` for the index I behind *kind*."""
    return d.mean() * (1.0 - inequality_index(d, kind, estimator, rel_tol))


def welfare_direct(
    d: Distribution,
    kind: WelfareKind,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """``∫₀¹ F⁻¹(p) ν(p) dp`` with no detour through the index.

    Samples are integrated lattice cell by lattice cell: the quantile is
    constant on a cell while the Zenga weight follows the piecewise-linear
    Lorenz embedding.
    """
    weight = weight_function(kind, d)
    nu = weight.func
    integrand = Integrand(lambda p: d.quantile(p) * nu(p), weight.hints)
    return integrate_over_ranks(integrand, d, rel_tol)


def identity_report(
    d: Distribution,
    kinds: Sequence[WelfareKind] | None = None,
    estimator: Estimator = Estimator.EMBEDDING,
    rel_tol: float = DEFAULT_REL_TOL,
) -> tuple[IdentityRow, ...]:
    """Welfare via the index against welfare via the weights, per kind.

    On samples only the embedding estimators are reproduced by the weight
    representation; the discrete ones show their finite-sample gap here.
    """
    rows: list[IdentityRow] = []
    for kind in kinds or all_kinds():
        index = inequality_index(d, kind, estimator, rel_tol)
        via_index = d.mean() * (1.0 - index)
        via_weights = welfare_direct(d, kind, rel_tol)
        gap = abs(via_weights - via_index) / abs(via_index)
        rows.append(IdentityRow(kind, index, via_index, via_weights, gap))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def _certificate(
    id_: str,
    residual: float,
    tolerance: float,
    description: str,
) -> PropositionCertificate:
    passed = residual < tolerance
    status = CertificateStatus.PASS if passed else CertificateStatus.FAIL
    return PropositionCertificate(id_, status, residual, tolerance, description)


def _boundary_term(d: Distribution, rel_tol: float) -> PropositionCertificate:
    # g(p) L/(1-L) with g = ln p + 1 - p, and L/(1-L) = lower / upper integral.
    low = BOUNDARY_OFFSET
    g_low = math.log(low) + 1.0 - low
    at_zero = g_low * d.lower_integral(low) / d.upper_integral(low)
    p = 1.0 - BOUNDARY_OFFSET
    q = 1.0 - p
    g_high = math.log1p(-q) + q
    at_one = g_high * d.lower_integral(p) / d.upper_integral(p)
    residual = max(abs(at_zero), abs(at_one))
    return _certificate(
        "boundary_term_zero",
        residual,
        1e-6,
        f"|g(p) L(p)/(1-L(p))| at p={low:g} and p=1-{low:g}",
    )


def _normalization(d: Distribution, rel_tol: float) -> PropositionCertificate:
    star = weight_function(ZENGA, d, WeightVariant.NU_STAR)
    star_integral = _weight_integral(star, None, rel_tol)
    full_integral = _weight_integral(weight_function(ZENGA, d), d, rel_tol)
    residual = max(abs(star_integral - 1.0), max(0.0, full_integral - 1.0))
    return _certificate(
        "nu_star_integrates_to_1",
        residual,
        1e-8,
        f"∫ν*_Z = {star_integral:.12g} (target 1); "
        f"∫ν_Z = {full_integral:.12g} (must not exceed 1)",
    )


def _grid_values(f: Callable[[float], float]) -> list[float]:
    return [f(p) for p in open_grid(CERTIFICATE_GRID)]


def _differences(values: Sequence[float]) -> list[float]:
    return [b - a for a, b in zip(values[:-1], values[1:], strict=True)]


def _decreasing(d: Distribution, rel_tol: float) -> PropositionCertificate:
    steps = _differences(_grid_values(weight_zenga_star))
    return _certificate(
        "nu_star_decreasing",
        max(steps),
        0.0,
        f"largest first difference of ν*_Z on {CERTIFICATE_GRID} grid points "
        f"(must be negative)",
    )


def _convexity_numerator(p: float) -> float:
    return (2.0 * p**3 + 3.0 * p**2 - 6.0 * p + 1.0) / (p * p)


def _convex(d: Distribution, rel_tol: float) -> PropositionCertificate:
    grid = open_grid(CERTIFICATE_GRID)
    curvature = _differences(_differences([weight_zenga_star(p) for p in grid]))
    sign = [_convexity_numerator(p) - 6.0 * math.log(p) for p in grid]
    knee = [_convexity_numerator(p) for p in grid if p <= CONVEXITY_KNEE]
    residual = max(0.0, -min(curvature), -min(sign), -min(knee))
    return _certificate(
        "nu_star_convex",
        residual,
        1e-10,
        "second differences of ν*_Z, h(p) - 6 ln p and h(p) below "
        f"p={CONVEXITY_KNEE:.6f} must be nonnegative",
    )


def _limits(d: Distribution, rel_tol: float) -> PropositionCertificate:
    # Each entry is deviation / allowance, so the certificate passes below 1.
    ratios: list[float] = []
    for eps in (1e-3, 1e-5):
        deviation = abs(weight_zenga_star(1.0 - eps) - (0.5 + eps / 3.0))
        ratios.append(deviation / eps**2)
    ratios.append(25.0 / weight_zenga_star(1e-12))
    ratios.append(abs(beta_zenga(d, 1e-12) - 1.0) / 1e-6)
    if d.is_bounded:
        limit = beta_zenga_limit_at_one(d)
        ratios.append(abs(beta_zenga(d, 1.0 - 1e-9) - limit) / 1e-6)
        behaviour = f"β_Z(1-1e-9) -> (μ/max)² = {limit:.12g}"
    else:
        betas = [beta_zenga(d, 1.0 - q) for q in (1e-3, 1e-6, _TOP_RANK_GAP)]
        pairs = zip(betas[:-1], betas[1:], strict=True)
        ratios.extend(later / earlier for earlier, later in pairs)
        # β_Z stays under (μ / F⁻¹(p))² because M⁺(p) > F⁻¹(p).
        envelope = (d.mean() / d.tail_quantile(_TOP_RANK_GAP)) ** 2
        ratios.append(betas[-1] / envelope)
        top = weight_zenga_star(1.0 - _TOP_RANK_GAP) * betas[-1]
        behaviour = (
            "β_Z decreasing at p=1-1e-3, 1-1e-6, 1-1e-12 and below (μ/F⁻¹(p))² "
            f"at p=1-1e-12, where ν_Z = {top:.3g}"
        )
    return _certificate(
        "limits",
        max(ratios),
        1.0,
        "ν*_Z(1-ε) = 1/2 + ε/3 + O(ε²), ν*_Z(1e-12) > 25, β_Z(0+) = 1, "
        f"{behaviour}; residual is the worst deviation/allowance ratio",
    )


def _beta_decreasing(d: Distribution, rel_tol: float) -> PropositionCertificate:
    grid = open_grid(CERTIFICATE_GRID)
    betas = [beta_zenga(d, p) for p in grid]
    stars = _grid_values(weight_zenga_star)
    weights = [star * beta for star, beta in zip(stars, betas, strict=True)]
    residual = max(
        max(_differences(betas)),
        max(_differences(weights)),
        max(betas) - 1.0,
    )
    return _certificate(
        "beta_decreasing",
        residual,
        1e-12,
        "β_Z and ν_Z nonincreasing and β_Z <= 1 on the certificate grid",
    )


def _welfare_identity(d: Distribution, rel_tol: float) -> PropositionCertificate:
    rows = identity_report(d, rel_tol=rel_tol)
    worst = max(rows, key=lambda row: row.relative_gap)
    return _certificate(
        "welfare_identity",
        worst.relative_gap,
        1e-8,
        "relative gap between ∫F⁻¹ν and μ(1-I) over "
        f"{', '.join(row.kind.label for row in rows)} (worst: {worst.kind.label})",
    )


type _Check = Callable[[Distribution, float], PropositionCertificate]

CERTIFICATES: dict[str, _Check] = {
    "boundary_term_zero": _boundary_term,
    "nu_star_integrates_to_1": _normalization,
    "nu_star_decreasing": _decreasing,
    "nu_star_convex": _convex,
    "limits": _limits,
    "beta_decreasing": _beta_decreasing,
    "welfare_identity": _welfare_identity,
}


def _run_certificate(
    id_: str,
    check: _Check,
    d: Distribution,
    rel_tol: float,
) -> PropositionCertificate:
    try:
        certificate = check(d, rel_tol)
    except WelfareLensError as exc:
        logger.warning(f"certificate {id_} could not be evaluated: {exc}")
        certificate = _certificate(id_, math.inf, 0.0, f"not evaluated: {exc}")
    logger.log(
        VERBOSE,
        f"certificate {id_}: {certificate.status} "
        f"(residual {certificate.residual:.3g})",
    )
    return certificate


def certify(
    d: Distribution,
    workers: int | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> list[PropositionCertificate]:
    """Run every certificate on *d*; a failing one does not stop the others.

    Certificates run on a thread pool; the result order is fixed.
    """
    logger.info(f"certifying {len(CERTIFICATES)} properties on {d.describe()}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_certificate, id_, check, d, rel_tol)
            for id_, check in CERTIFICATES.items()
        ]
        return [future.result() for future in futures]
