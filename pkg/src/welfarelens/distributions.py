"""Income distributions: empirical samples and closed-form parametric families.

Every distribution is described through its quantile function F⁻¹ on (0, 1).
Besides quantile, CDF and mean, each one exposes the two partial integrals

    lower_integral(p) = ∫₀ᵖ F⁻¹(s) ds
    upper_integral(p) = ∫ₚ¹ F⁻¹(s) ds

in closed form. Lorenz curves, upper-group means and the Zenga penalization all
derive from these, so they are written to stay accurate at both ends of (0, 1)
rather than as ``mean - other``.
"""

import csv
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import ClassVar, Self

import numpy as np
import numpy.typing as npt
import scipy.special as sc

from .exceptions import DomainError, SampleError
from .quadrature import DEFAULT_REL_TOL, Integrand, integrate, integrate_cells

logger = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]

# Terms of the p -> 0 series for the exponential lower integral.
_EXP_SERIES_TERMS: int = 12
_EXP_SERIES_CUTOFF: float = 1e-2


def _check_probability(p: float, name: str = "p") -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {p}")


def _check_closed_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")


def _check_income(x: float) -> None:
    if x < 0.0:
        raise DomainError(f"income must be nonnegative, got {x}")


def _norm_cdf(x: float) -> float:
    return float(sc.ndtr(x))


def _norm_ppf(q: float) -> float:
    return float(sc.ndtri(q))


class Distribution(ABC):
    """A nonnegative income distribution with finite, positive mean."""

    family: ClassVar[str]

    @abstractmethod
    def quantile(self, p: float) -> float:
        """Left-continuous quantile ``inf{z : F(z) >= p}`` for p in (0, 1)."""

    @abstractmethod
    def tail_quantile(self, s: float) -> float:
        """``quantile(1 - s)`` computed without forming ``1 - s``."""

    @abstractmethod
    def cdf(self, x: float) -> float: ...

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def lower_integral(self, p: float) -> float:
        """``∫₀ᵖ F⁻¹(s) ds`` for p in [0, 1]."""

    @abstractmethod
    def upper_integral(self, p: float) -> float:
        """``∫ₚ¹ F⁻¹(s) ds`` for p in [0, 1]."""

    @property
    @abstractmethod
    def support_max(self) -> float:
        """Largest income in the support, ``math.inf`` when unbounded."""

    @abstractmethod
    def scaled(self, c: float) -> Self:
        """The distribution of ``c * X``."""

    @abstractmethod
    def describe(self) -> str: ...

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.support_max)


@dataclass(frozen=True)
class Uniform(Distribution):
    family: ClassVar[str] = "uniform"

    low: float
    high: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise DomainError("uniform bounds must be finite")
        if not 0.0 <= self.low < self.high:
            raise DomainError(
                f"uniform needs 0 <= a < b, got a={self.low}, b={self.high}"
            )

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return self.low + (self.high - self.low) * p

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return self.high - (self.high - self.low) * s

    def cdf(self, x: float) -> float:
        _check_income(x)
        if x <= self.low:
            return 0.0
        if x >= self.high:
            return 1.0
        return (x - self.low) / (self.high - self.low)

    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        return self.low * p + 0.5 * (self.high - self.low) * p * p

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        return (1.0 - p) * (self.low + 0.5 * (self.high - self.low) * (1.0 + p))

    @property
    def support_max(self) -> float:
        return self.high

    def scaled(self, c: float) -> Self:
        return type(self)(self.low * c, self.high * c)

    def describe(self) -> str:
        return f"uniform({self.low:g}, {self.high:g})"


@dataclass(frozen=True)
class Exponential(Distribution):
    family: ClassVar[str] = "exponential"

    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"exponential rate must be positive, got {self.rate}")

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return -math.log1p(-p) / self.rate

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return -math.log(s) / self.rate

    def cdf(self, x: float) -> float:
        _check_income(x)
        return -math.expm1(-self.rate * x)

    def mean(self) -> float:
        return 1.0 / self.rate

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 1.0:
            return self.mean()
        if p < _EXP_SERIES_CUTOFF:
            # p + (1-p) ln(1-p) cancels to leading order; sum p^k / (k(k-1)).
            terms = (p**k / (k * (k - 1)) for k in range(2, _EXP_SERIES_TERMS + 1))
            return math.fsum(terms) / self.rate
        return (p + (1.0 - p) * math.log1p(-p)) / self.rate

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 1.0:
            return 0.0
        return (1.0 - p) * (1.0 - math.log1p(-p)) / self.rate

    @property
    def support_max(self) -> float:
        return math.inf

    def scaled(self, c: float) -> Self:
        return type(self)(self.rate / c)

    def describe(self) -> str:
        return f"exponential({self.rate:g})"


@dataclass(frozen=True)
class Pareto(Distribution):
    """Pareto type I with ``F(x) = 1 - (x_min / x)^alpha`` for ``x >= x_min``."""

    family: ClassVar[str] = "pareto"

    alpha: float
    x_min: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or self.alpha <= 1.0:
            raise DomainError(
                f"pareto alpha must exceed 1, got {self.alpha} (infinite mean)"
            )
        if not (math.isfinite(self.x_min) and self.x_min > 0.0):
            raise DomainError(f"pareto x_min must be positive, got {self.x_min}")

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return self.x_min * math.exp(-math.log1p(-p) / self.alpha)

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return self.x_min * s ** (-1.0 / self.alpha)

    def cdf(self, x: float) -> float:
        _check_income(x)
        if x < self.x_min:
            return 0.0
        return -math.expm1(self.alpha * math.log(self.x_min / x))

    def mean(self) -> float:
        return self.alpha * self.x_min / (self.alpha - 1.0)

    @property
    def _exponent(self) -> float:
        return 1.0 - 1.0 / self.alpha

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 1.0:
            return self.mean()
        return self.mean() * -math.expm1(self._exponent * math.log1p(-p))

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 1.0:
            return 0.0
        return self.mean() * math.exp(self._exponent * math.log1p(-p))

    @property
    def support_max(self) -> float:
        return math.inf

    def scaled(self, c: float) -> Self:
        return type(self)(self.alpha, self.x_min * c)

    def describe(self) -> str:
        return f"pareto({self.alpha:g}, {self.x_min:g})"


@dataclass(frozen=True)
class LogNormal(Distribution):
    """``exp(N(log_mean, log_sd²))``; Φ and Φ⁻¹ from ``scipy.special``."""

    family: ClassVar[str] = "lognormal"

    log_mean: float
    log_sd: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.log_mean):
            raise DomainError(f"lognormal log_mean must be finite, got {self.log_mean}")
        if not (math.isfinite(self.log_sd) and self.log_sd > 0.0):
            raise DomainError(f"lognormal log_sd must be positive, got {self.log_sd}")

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return math.exp(self.log_mean + self.log_sd * _norm_ppf(p))

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return math.exp(self.log_mean - self.log_sd * _norm_ppf(s))

    def cdf(self, x: float) -> float:
        _check_income(x)
        if x == 0.0:
            return 0.0
        return _norm_cdf((math.log(x) - self.log_mean) / self.log_sd)

    def mean(self) -> float:
        return math.exp(self.log_mean + 0.5 * self.log_sd**2)

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p in {0.0, 1.0}:
            return p * self.mean()
        z = _norm_ppf(p)
        return self.mean() * _norm_cdf(z - self.log_sd)

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p in {0.0, 1.0}:
            return (1.0 - p) * self.mean()
        z = _norm_ppf(p)
        return self.mean() * _norm_cdf(self.log_sd - z)

    @property
    def support_max(self) -> float:
        return math.inf

    def scaled(self, c: float) -> Self:
        return type(self)(self.log_mean + math.log(c), self.log_sd)

    def describe(self) -> str:
        return f"lognormal({self.log_mean:g}, {self.log_sd:g})"


@dataclass(frozen=True)
class Degenerate(Distribution):
    family: ClassVar[str] = "degenerate"

    value: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise DomainError(f"degenerate value must be positive, got {self.value}")

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return self.value

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return self.value

    def cdf(self, x: float) -> float:
        _check_income(x)
        return 0.0 if x < self.value else 1.0

    def mean(self) -> float:
        return self.value

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        return self.value * p

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        return self.value * (1.0 - p)

    @property
    def support_max(self) -> float:
        return self.value

    def scaled(self, c: float) -> Self:
        return type(self)(self.value * c)

    def describe(self) -> str:
        return f"degenerate({self.value:g})"


def _frozen(array: FloatArray) -> FloatArray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class EmpiricalSample(Distribution):
    """Sorted nonnegative incomes with positive frequency weights.

    ``lattice[i]`` is the population share of the ``i`` smallest incomes
    (``lattice[0] == 0``, ``lattice[-1] == 1``) and ``partial_sums[i]`` the
    matching share-weighted income sum, so ``partial_sums[-1]`` is the mean.
    Between lattice points the quantile is constant and the lower integral is
    linear, which is the piecewise-linear Lorenz embedding.
    """

    family: ClassVar[str] = "empirical"

    values: FloatArray
    weights: FloatArray
    lattice: FloatArray = field(init=False, repr=False)
    partial_sums: FloatArray = field(init=False, repr=False)
    suffix_sums: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise SampleError("sample must be a non-empty list of incomes")
        if weights.shape != values.shape:
            raise SampleError("weights must match incomes one-to-one")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise SampleError("incomes must be finite and nonnegative")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise SampleError("weights must be finite and positive")
        if np.any(np.diff(values) < 0.0):
            raise SampleError("incomes must be sorted ascending")
        if not np.any(values > 0.0):
            raise SampleError("sample has no positive income")

        shares = weights / weights.sum()
        lattice = np.concatenate(([0.0], np.cumsum(shares)))
        lattice[-1] = 1.0
        contributions = shares * values
        partial = np.concatenate(([0.0], np.cumsum(contributions)))
        suffix = np.concatenate((np.cumsum(contributions[::-1])[::-1], [0.0]))
        for name, array in (
            ("values", values),
            ("weights", weights),
            ("lattice", lattice),
            ("partial_sums", partial),
            ("suffix_sums", suffix),
        ):
            object.__setattr__(self, name, _frozen(array))

    @classmethod
    def from_values(
        cls,
        values: Iterable[float],
        weights: Iterable[float] | None = None,
    ) -> Self:
        """Build a sample from unsorted incomes; weights default to 1."""
        raw = np.asarray(list(values), dtype=np.float64)
        raw_weights = (
            np.ones_like(raw)
            if weights is None
            else np.asarray(list(weights), dtype=np.float64)
        )
        if raw_weights.shape != raw.shape:
            raise SampleError("weights must match incomes one-to-one")
        order = np.argsort(raw, kind="stable")
        return cls(raw[order], raw_weights[order])

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def n_effective(self) -> float:
        """Total frequency weight."""
        return float(self.weights.sum())

    @property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def cell(self, p: float) -> int:
        """Index ``i`` of the income held at rank p.

        ``lattice[i] < p <= lattice[i + 1]``, clipped to the last income.
        """
        index = int(np.searchsorted(self.lattice[1:], p, side="left"))
        return min(index, self.size - 1)

    def quantile(self, p: float) -> float:
        _check_probability(p)
        return float(self.values[self.cell(p)])

    def tail_quantile(self, s: float) -> float:
        _check_probability(s, "s")
        return float(self.values[self.cell(1.0 - s)])

    def cdf(self, x: float) -> float:
        _check_income(x)
        return float(self.lattice[int(np.searchsorted(self.values, x, side="right"))])

    def mean(self) -> float:
        return float(self.partial_sums[-1])

    def lower_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 0.0:
            return 0.0
        i = self.cell(p)
        return float(self.partial_sums[i] + self.values[i] * (p - self.lattice[i]))

    def upper_integral(self, p: float) -> float:
        _check_closed_probability(p)
        if p == 1.0:
            return 0.0
        i = self.cell(p) if p > 0.0 else 0
        return float(
            self.suffix_sums[i + 1] + self.values[i] * (self.lattice[i + 1] - p)
        )

    @property
    def support_max(self) -> float:
        return float(self.values[-1])

    def scaled(self, c: float) -> Self:
        return type(self)(self.values * c, self.weights.copy())

    def describe(self) -> str:
        suffix = "" if self.is_unweighted else ", weighted"
        return f"empirical(n={self.size}{suffix})"


def quantile(d: Distribution, p: float) -> float:
    return d.quantile(p)


def cdf(d: Distribution, x: float) -> float:
    return d.cdf(x)


def mean(d: Distribution) -> float:
    return d.mean()


def scale(d: Distribution, c: float) -> Distribution:
    """The distribution of ``c * X`` for ``c > 0``."""
    if not (math.isfinite(c) and c > 0.0):
        raise DomainError(f"scale factor must be positive, got {c}")
    return d.scaled(c)


def mean_by_quadrature(d: Distribution, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``∫₀¹ F⁻¹(s) ds`` by quadrature, cell by cell for empirical samples."""
    if isinstance(d, EmpiricalSample):
        return integrate_cells(d.quantile, d.lattice.tolist(), rel_tol).value
    integrand = Integrand(d.quantile, reflected=d.tail_quantile)
    return integrate(integrand, 0.0, 1.0, rel_tol).value


def _parse_cell(raw: str | None, row: int, what: str) -> float:
    text = (raw or "").strip()
    if not text:
        raise SampleError(f"empty {what} at row {row}")
    try:
        number = float(text)
    except ValueError:
        raise SampleError(f"unparsable {what} {text!r} at row {row}") from None
    if not math.isfinite(number):
        raise SampleError(f"non-finite {what} {text!r} at row {row}")
    return number


def _read_records(
    reader: csv.DictReader[str],
    column: str,
    weight_column: str | None,
) -> EmpiricalSample:
    fieldnames = reader.fieldnames
    if not fieldnames:
        raise SampleError("empty file: no header row")
    for name in (column, weight_column):
        if name is not None and name not in fieldnames:
            available = ", ".join(repr(f) for f in fieldnames)
            raise SampleError(f"missing column {name!r} (available: {available})")

    values: list[float] = []
    weights: list[float] = []
    for record in reader:
        # File line on which the record ends.
        row_number = reader.line_num
        income = _parse_cell(record.get(column), row_number, "income")
        if income < 0.0:
            raise SampleError(f"negative income at row {row_number}")
        values.append(income)
        if weight_column is not None:
            weight = _parse_cell(record.get(weight_column), row_number, "weight")
            if weight <= 0.0:
                raise SampleError(f"non-positive weight at row {row_number}")
            weights.append(weight)

    if not values:
        raise SampleError("empty file: no data rows")
    logger.debug(f"read {len(values)} incomes from column {column!r}")
    if weight_column is None:
        return EmpiricalSample.from_values(values)
    return EmpiricalSample.from_values(values, weights)


def from_csv_column(
    rows: Iterable[str],
    column: str,
    weight_column: str | None = None,
) -> EmpiricalSample:
    """Read one income column (and optionally a weight column) from CSV lines.

    Diagnostics give the file line on which the offending record ends, so the
    first data row directly under the header is row 2.
    """
    reader = csv.DictReader(rows)
    try:
        return _read_records(reader, column, weight_column)
    except UnicodeDecodeError as exc:
        raise SampleError(
            f"file is not valid UTF-8 ({exc.reason}) after line {reader.line_num}"
        ) from None
    except csv.Error as exc:
        raise SampleError(f"malformed CSV at line {reader.line_num}: {exc}") from None


def load_sample(
    path: Path,
    column: str,
    weight_column: str | None = None,
) -> EmpiricalSample:
    """Open a UTF-8 CSV file (a leading BOM is tolerated) and read a sample."""
    with path.open(encoding="utf-8-sig", newline="") as handle:
        try:
            return from_csv_column(handle, column, weight_column)
        except SampleError as exc:
            raise SampleError(f"{path}: {exc}") from None
