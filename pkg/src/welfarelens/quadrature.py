"""Numerical integration on subintervals of [0, 1].

Every index, welfare and normalization integral in welfarelens goes through
this module. The integrands share two awkward traits: several are undefined at
the endpoints (``-ln p`` at 0, ``0/0`` forms at 1), and quantile functions of
heavy-tailed families blow up at 1. Both are handled by the same device, a
double-exponential change of variable

    x(t) = lo + (hi - lo) * (1 + tanh(pi/2 * sinh t)) / 2

that clusters nodes exponentially toward both endpoints and turns an endpoint
singularity into a doubly-exponentially decaying tail in ``t``. The
transformed integrand is then integrated over ``[-T, T]`` by adaptive
bisection with a 7/15-point Gauss-Kronrod pair per panel.

:func:`integrate_improper_at_zero` is the classic trapezoidal tanh-sinh
scheme (step halving) with an explicit check that the truncated tail near 0 is
negligible, so a non-integrable singularity is reported rather than silently
truncated.

Endpoints are never evaluated: a node whose abscissa rounds onto an endpoint
contributes nothing. Near ``p = 1`` the distance ``1 - p`` cannot be resolved
below double spacing, so an :class:`Integrand` may carry a ``reflected``
evaluator that receives that distance directly.
"""

import heapq
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Flag, auto
from typing import NamedTuple

from .exceptions import (
    DivergentIntegralError,
    DomainError,
    IntegrandError,
    QuadratureError,
)

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL: float = 1e-10
ABS_FLOOR: float = 1e-14
MAX_EVALUATIONS: int = 1_000_000

# Half-width of the truncated t-range. At t = 6 the node sits e^-633 from the
# endpoint, below any tail mass an integrable singularity can carry.
_T_MAX: float = 6.0
_INITIAL_PANELS: int = 4
# Panels narrower than this in t cannot be bisected meaningfully.
_MIN_PANEL_WIDTH: float = 1e-12
# A NaN at a node this close to a hinted endpoint is dropped, not raised.
_NAN_GUARD: float = 1e-8
_MAX_LEVELS: int = 12
_MIN_LEVELS: int = 3
# The t-slab adjacent to -T whose mass decides divergence.
_TAIL_SLAB: float = 1.0

_HALF_PI: float = math.pi / 2.0

# Gauss-Kronrod 7/15 abscissae on [-1, 1] (positive half) with Kronrod
# weights; every second abscissa is also a Gauss node.
_GK_NODES: tuple[float, ...] = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_K15_WEIGHTS: tuple[float, ...] = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Gauss weights for _GK_NODES[1], [3], [5], [7].
_G7_WEIGHTS: tuple[float, ...] = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


class Singularity(Flag):
    """Endpoint behaviour an integrand declares to the engine."""

    NONE = 0
    LOG_AT_ZERO = auto()
    VANISHING_AT_ONE = auto()


@dataclass(frozen=True)
class Integrand:
    """A real function on (0, 1) plus hints about its endpoint behaviour.

    ``reflected(s)`` must equal ``func(1 - s)`` but be computed from ``s``
    itself; it is only consulted on intervals ending at 1.
    """

    func: Callable[[float], float]
    hints: Singularity = Singularity.NONE
    reflected: Callable[[float], float] | None = None


class QuadResult(NamedTuple):
    """Value of an integral with its error estimate and evaluation count."""

    value: float
    error_estimate: float
    evaluations: int


type IntegrandLike = Integrand | Callable[[float], float]


def _as_integrand(f: IntegrandLike) -> Integrand:
    return f if isinstance(f, Integrand) else Integrand(f)


def combine(results: Sequence[QuadResult]) -> QuadResult:
    """Sum results of integrals over adjacent intervals."""
    return QuadResult(
        value=math.fsum(r.value for r in results),
        error_estimate=math.fsum(r.error_estimate for r in results),
        evaluations=sum(r.evaluations for r in results),
    )


class _Transformed:
    """The double-exponentially transformed integrand g(t) on [-T, T].

    Counts evaluations so the budget can be enforced; one instance serves a
    single integration call, so the counter is never shared between threads.
    """

    def __init__(self, integrand: Integrand, lo: float, hi: float) -> None:
        self._f = integrand.func
        self._reflected = integrand.reflected if hi == 1.0 else None
        self._hints = integrand.hints
        self._lo = lo
        self._hi = hi
        self._width = hi - lo
        self.evaluations = 0

    def __call__(self, t: float) -> float:
        s = _HALF_PI * math.sinh(t)
        e = math.exp(-2.0 * abs(s))
        # Distances to the near endpoint are formed without cancellation.
        near = self._width * e / (1.0 + e)
        far = self._width / (1.0 + e)
        dxdt = self._width * _HALF_PI * math.cosh(t) * 2.0 * e / (1.0 + e) ** 2
        if s >= 0.0:
            to_lo, to_hi = far, near
        else:
            to_lo, to_hi = near, far

        if s >= 0.0 and self._reflected is not None:
            if to_hi <= 0.0:
                return 0.0
            x = self._hi - to_hi
            self.evaluations += 1
            value = self._reflected(to_hi)
        else:
            x = self._lo + to_lo if s < 0.0 else self._hi - to_hi
            if x <= self._lo or x >= self._hi:
                return 0.0
            self.evaluations += 1
            value = self._f(x)

        if not math.isfinite(value):
            if self._guarded(to_lo, to_hi) and math.isnan(value):
                return 0.0
            raise IntegrandError(f"integrand returned {value} at p={x!r}", x)
        return value * dxdt

    def _guarded(self, to_lo: float, to_hi: float) -> bool:
        if Singularity.LOG_AT_ZERO in self._hints and to_lo < _NAN_GUARD:
            return True
        return Singularity.VANISHING_AT_ONE in self._hints and to_hi < _NAN_GUARD


def _gauss_kronrod(g: _Transformed, a: float, b: float) -> tuple[float, float]:
    """Kronrod estimate and |Kronrod - Gauss| on the panel [a, b]."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    kronrod = 0.0
    gauss = 0.0
    for i, node in enumerate(_GK_NODES):
        if node == 0.0:
            values = (g(center),)
        else:
            values = (g(center - half * node), g(center + half * node))
        subtotal = math.fsum(values)
        kronrod += _K15_WEIGHTS[i] * subtotal
        if i % 2 == 1:
            gauss += _G7_WEIGHTS[i // 2] * subtotal
    return kronrod * half, abs(kronrod - gauss) * half


def _check_bounds(lo: float, hi: float, rel_tol: float) -> None:
    if not (0.0 <= lo < hi <= 1.0):
        raise DomainError(
            f"integration bounds must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"
        )
    if not rel_tol > 0.0:
        raise DomainError(f"rel_tol must be positive, got {rel_tol}")


def integrate(
    f: IntegrandLike,
    lo: float,
    hi: float,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    max_evaluations: int = MAX_EVALUATIONS,
) -> QuadResult:
    """Integrate *f* over ``[lo, hi]`` within ``0 <= lo < hi <= 1``.

    Converges when the summed panel error estimates fall below
    ``max(rel_tol * |value|, ABS_FLOOR)``. Raises :class:`QuadratureError`
    (with the partial result) when the evaluation budget runs out and
    :class:`IntegrandError` when *f* produces NaN or an infinity.
    """
    _check_bounds(lo, hi, rel_tol)
    integrand = _as_integrand(f)
    if Singularity.LOG_AT_ZERO in integrand.hints and lo == 0.0:
        return integrate_improper_at_zero(
            integrand, rel_tol, hi=hi, max_evaluations=max_evaluations
        )

    g = _Transformed(integrand, lo, hi)
    step = 2.0 * _T_MAX / _INITIAL_PANELS
    # Max-heap on the panel error: entries are (-error, a, b, value).
    heap: list[tuple[float, float, float, float]] = []
    for i in range(_INITIAL_PANELS):
        a = -_T_MAX + i * step
        b = a + step
        value, error = _gauss_kronrod(g, a, b)
        heap.append((-error, a, b, value))
    heapq.heapify(heap)

    while True:
        total = math.fsum(entry[3] for entry in heap)
        error = math.fsum(-entry[0] for entry in heap)
        if error <= max(rel_tol * abs(total), ABS_FLOOR):
            break
        result = QuadResult(total, error, g.evaluations)
        if g.evaluations >= max_evaluations:
            raise QuadratureError(
                f"quadrature failure: no convergence on [{lo:g}, {hi:g}] after "
                f"{g.evaluations} evaluations (error estimate {error:.3g})",
                result,
            )
        _, a, b, _ = heapq.heappop(heap)
        if b - a < _MIN_PANEL_WIDTH:
            raise QuadratureError(
                f"quadrature failure: roundoff limits accuracy on [{lo:g}, {hi:g}] "
                f"(error estimate {error:.3g})",
                result,
            )
        mid = 0.5 * (a + b)
        for left, right in ((a, mid), (mid, b)):
            value, panel_error = _gauss_kronrod(g, left, right)
            heapq.heappush(heap, (-panel_error, left, right, value))

    logger.debug(
        f"integrate [{lo:g}, {hi:g}]: {total!r} ± {error:.2g} "
        f"({g.evaluations} evaluations)"
    )
    return QuadResult(total, error, g.evaluations)


def integrate_improper_at_zero(
    f: IntegrandLike,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    hi: float = 1.0,
    max_evaluations: int = MAX_EVALUATIONS,
) -> QuadResult:
    """Integrate *f* over ``(0, hi]`` where *f* may grow like ``-ln p`` at 0.

    Trapezoidal tanh-sinh sums with the step halved each level until two
    successive levels agree. Raises :class:`DivergentIntegralError` when the
    mass in the outermost slab next to 0 is not negligible, which is what a
    non-integrable singularity looks like once the range is truncated.
    """
    _check_bounds(0.0, hi, rel_tol)
    g = _Transformed(_as_integrand(f), 0.0, hi)
    samples: dict[float, float] = {}

    def sample(t: float) -> float:
        if t not in samples:
            samples[t] = g(t)
        return samples[t]

    h = 1.0
    n = int(_T_MAX / h)
    total = h * math.fsum(sample(j * h) for j in range(-n, n + 1))
    previous = total
    error = math.inf
    for level in range(1, _MAX_LEVELS + 1):
        h /= 2.0
        n = int(_T_MAX / h)
        fresh = math.fsum(sample(j * h) for j in range(-n, n + 1, 1) if j % 2 != 0)
        total = 0.5 * previous + h * fresh
        error = abs(total - previous)
        target = max(rel_tol * abs(total), ABS_FLOOR)
        converged = level >= _MIN_LEVELS and error <= target
        if converged or g.evaluations >= max_evaluations:
            break
        previous = total

    result = QuadResult(total, error, g.evaluations)
    edge = -_T_MAX + _TAIL_SLAB
    tail = h * math.fsum(abs(v) for t, v in samples.items() if t <= edge)
    if tail > max(rel_tol * abs(total), ABS_FLOOR):
        raise DivergentIntegralError(
            f"divergent integral: mass {tail:.3g} remains next to p = 0 on (0, {hi:g}]",
            result,
        )
    if error > max(rel_tol * abs(total), ABS_FLOOR):
        raise QuadratureError(
            f"quadrature failure: tanh-sinh did not converge after "
            f"{g.evaluations} evaluations "
            f"(error estimate {error:.3g})",
            result,
        )
    logger.debug(
        f"integrate_improper_at_zero (0, {hi:g}]: {total!r} ± {error:.2g} "
        f"({g.evaluations} evaluations)"
    )
    return result


def integrate_cells(
    f: IntegrandLike,
    breakpoints: Sequence[float],
    rel_tol: float = DEFAULT_REL_TOL,
) -> QuadResult:
    """Integrate a piecewise-smooth *f* cell by cell between sorted breakpoints.

    Zero-width cells (tied lattice points) are skipped.
    """
    integrand = _as_integrand(f)
    results = [
        integrate(integrand, lo, hi, rel_tol)
        for lo, hi in zip(breakpoints[:-1], breakpoints[1:], strict=True)
        if hi > lo
    ]
    return combine(results)
