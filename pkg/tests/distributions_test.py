"""Checks the income distributions and CSV ingestion (`distributions`)."""

import io
import math
import shutil
import tempfile
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import lognorm

from welfarelens.distributions import (
    Degenerate,
    Distribution,
    EmpiricalSample,
    Exponential,
    LogNormal,
    Pareto,
    Uniform,
    cdf,
    from_csv_column,
    load_sample,
    mean,
    mean_by_quadrature,
    quantile,
    scale,
)
from welfarelens.exceptions import DomainError, SampleError

_PARAMETRIC: tuple[Distribution, ...] = (
    Uniform(0.0, 1.0),
    Uniform(1.0, 3.0),
    Exponential(1.0),
    Exponential(0.25),
    Pareto(2.0, 1.0),
    Pareto(3.5, 2.0),
    LogNormal(0.0, 1.0),
    LogNormal(1.0, 0.4),
    Degenerate(5.0),
)


def _close(actual: float, expected: float, tol: float, what: str) -> None:
    if abs(actual - expected) > tol:
        raise AssertionError(f"{what}: got {actual!r}, want {expected!r} (±{tol:g})")


def _sample(
    text: str, column: str = "income", weights: str | None = None
) -> EmpiricalSample:
    return from_csv_column(io.StringIO(text), column, weights)


def _expect_sample_error(text: str, fragment: str, weights: str | None = None) -> None:
    try:
        _sample(text, weights=weights)
    except SampleError as exc:
        if fragment not in str(exc):
            raise AssertionError(f"expected {fragment!r} in {str(exc)!r}") from None
    else:
        raise AssertionError(f"CSV {text!r} should have been rejected")


def assert_quantile_cdf_mean_examples() -> None:
    _close(quantile(Degenerate(5.0), 0.3), 5.0, 0.0, "degenerate quantile")
    _close(quantile(Uniform(0.0, 1.0), 0.25), 0.25, 1e-15, "uniform quantile")
    _close(quantile(Pareto(2.0, 1.0), 0.75), 2.0, 1e-14, "pareto quantile")

    _close(mean(Exponential(1.0)), 1.0, 1e-15, "exponential mean")
    _close(mean(EmpiricalSample.from_values([1.0, 3.0])), 2.0, 1e-15, "{1,3} mean")
    _close(mean(Uniform(0.0, 2.0)), 1.0, 1e-15, "uniform mean")

    _close(cdf(Uniform(0.0, 1.0), 0.4), 0.4, 1e-15, "uniform cdf")
    _close(cdf(Pareto(2.0, 1.0), 2.0), 0.75, 1e-15, "pareto cdf")
    _close(cdf(EmpiricalSample.from_values([1.0, 3.0]), 1.0), 0.5, 0.0, "step cdf")


def assert_csv_ingestion() -> None:
    sample = _sample("income\n3\n1\n")
    if sample.values.tolist() != [1.0, 3.0]:
        raise AssertionError(f"incomes must be sorted, got {sample.values.tolist()}")
    if not sample.is_unweighted:
        raise AssertionError("a sample without weight column is unweighted")

    weighted = _sample("income,w\n1,2\n3,1\n", weights="w")
    pairs = list(zip(weighted.values.tolist(), weighted.weights.tolist(), strict=True))
    if pairs != [(1.0, 2.0), (3.0, 1.0)]:
        raise AssertionError("weights must travel with their incomes")
    _close(weighted.mean(), 5.0 / 3.0, 1e-15, "weighted mean")
    _close(weighted.quantile(0.5), 1.0, 0.0, "weighted quantile below 2/3")
    _close(weighted.quantile(0.7), 3.0, 0.0, "weighted quantile above 2/3")
    _close(weighted.n_effective, 3.0, 0.0, "total weight")

    _expect_sample_error("income\n-1\n", "negative income at row 2")
    _expect_sample_error("", "empty file")
    _expect_sample_error("income\n", "no data rows")
    _expect_sample_error("wage\n1\n", "missing column 'income'")
    _expect_sample_error("income\n1\nabc\n", "unparsable income 'abc' at row 3")
    _expect_sample_error("income,other\n,5\n", "empty income at row 2")
    _expect_sample_error("income\ninf\n", "non-finite income")
    _expect_sample_error("income,w\n1,0\n", "non-positive weight at row 2", "w")
    _expect_sample_error("income\n0\n0\n", "no positive income")


def assert_load_sample_file() -> None:
    tmp = Path(tempfile.mkdtemp())
    try:
        path = tmp / "incomes.csv"
        # Spreadsheet exports often start with a byte-order mark.
        _ = path.write_text("\ufeffincome,w\n3,1\n1,1\n", encoding="utf-8")
        sample = load_sample(path, "income")
        if sample.values.tolist() != [1.0, 3.0]:
            raise AssertionError(f"BOM header misread: {sample.values.tolist()}")
        try:
            load_sample(path, "wage")
        except SampleError as exc:
            if str(path) not in str(exc):
                raise AssertionError(f"error must name the file: {exc}") from None
        else:
            raise AssertionError("a missing column must be reported")
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def assert_csv_rows_are_file_lines() -> None:
    # A skipped blank line and a quoted field spanning two lines both shift rows.
    _expect_sample_error("income\n1\n\n-2\n", "negative income at row 4")
    _expect_sample_error(
        'income,note\n1,"two\nlines"\nabc,x\n', "unparsable income 'abc' at row 4"
    )
    _expect_sample_error(
        "income,w\n1,1\n\n2,0\n", "non-positive weight at row 4", "w"
    )
    oversized = 'income\n"' + "9" * 200_000 + '"\n'
    _expect_sample_error(oversized, "malformed CSV at line")


def assert_undecodable_file_is_a_sample_error() -> None:
    tmp = Path(tempfile.mkdtemp())
    try:
        path = tmp / "latin1.csv"
        _ = path.write_bytes(b"income\n\xff\n")
        try:
            load_sample(path, "income")
        except SampleError as exc:
            if str(path) not in str(exc) or "not valid UTF-8" not in str(exc):
                raise AssertionError(f"unexpected decode diagnostic: {exc}") from None
        else:
            raise AssertionError("a non-UTF-8 file must be rejected")
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def assert_lognormal_matches_scipy() -> None:
    for log_mean, log_sd in ((0.0, 1.0), (1.0, 0.4), (-2.0, 2.5)):
        d = LogNormal(log_mean, log_sd)
        reference = lognorm(s=log_sd, scale=math.exp(log_mean))
        for p in (1e-12, 0.3, 0.5, 1.0 - 1e-9):
            want = float(reference.ppf(p))
            _close(d.quantile(p), want, 1e-12 * want, f"{d.describe()} F⁻¹({p})")
        for x in (0.05, 1.0, 7.5):
            _close(d.cdf(x), float(reference.cdf(x)), 1e-14, f"{d.describe()} F({x})")


def assert_partial_integrals_add_up() -> None:
    samples = (
        EmpiricalSample.from_values([1.0, 3.0]),
        EmpiricalSample.from_values([0.0, 2.0, 2.0, 7.5], [1.0, 2.0, 0.5, 1.0]),
    )
    for d in (*_PARAMETRIC, *samples):
        mu = d.mean()
        for p in (0.0, 1e-9, 0.01, 0.25, 0.5, 0.9, 1.0 - 1e-9, 1.0):
            total = d.lower_integral(p) + d.upper_integral(p)
            _close(total, mu, 1e-12 * mu, f"{d.describe()} split at p={p}")
        _close(d.lower_integral(1.0), mu, 1e-12 * mu, f"{d.describe()} lower(1)")
        _close(d.upper_integral(0.0), mu, 1e-12 * mu, f"{d.describe()} upper(0)")


def assert_mean_matches_quadrature() -> None:
    samples = (EmpiricalSample.from_values([0.5, 1.0, 4.0, 9.0], [3.0, 1.0, 1.0, 2.0]),)
    for d in (*_PARAMETRIC, *samples):
        by_quadrature = mean_by_quadrature(d)
        _close(by_quadrature, d.mean(), 1e-8 * d.mean(), f"{d.describe()} mean")


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1.0 - 1e-3))
def assert_cdf_inverts_quantile(p: float) -> None:
    for d in _PARAMETRIC:
        if isinstance(d, Degenerate):
            continue
        _close(d.cdf(d.quantile(p)), p, 1e-9, f"{d.describe()} F(F⁻¹(p))")
        _close(d.tail_quantile(1.0 - p), d.quantile(p), 1e-9 * d.quantile(p), "tail")


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.01, max_value=100.0))
def assert_scaling(c: float) -> None:
    for d in _PARAMETRIC:
        scaled = scale(d, c)
        _close(scaled.mean(), c * d.mean(), 1e-12 * c * d.mean(), f"{d.describe()}·c")
        q = c * d.quantile(0.3)
        _close(scaled.quantile(0.3), q, 1e-12 * q, f"{d.describe()} quantile·c")


def assert_domain_errors() -> None:
    try:
        Pareto(0.5, 1.0)
    except DomainError as exc:
        if "infinite mean" not in str(exc):
            raise AssertionError(f"pareto alpha <= 1 must say why: {exc}") from None
    else:
        raise AssertionError("pareto alpha <= 1 must be rejected")

    invalid = (
        lambda: Uniform(1.0, 1.0),
        lambda: Uniform(-1.0, 1.0),
        lambda: Exponential(0.0),
        lambda: LogNormal(0.0, 0.0),
        lambda: Degenerate(0.0),
        lambda: Uniform(0.0, 1.0).quantile(0.0),
        lambda: Uniform(0.0, 1.0).quantile(1.0),
        lambda: Uniform(0.0, 1.0).cdf(-1.0),
        lambda: scale(Uniform(0.0, 1.0), 0.0),
    )
    for build in invalid:
        try:
            build()
        except DomainError:
            continue
        raise AssertionError("invalid argument accepted")

    try:
        EmpiricalSample.from_values([1.0, 2.0], [1.0])
    except SampleError:
        pass
    else:
        raise AssertionError("mismatched weights must be rejected")


def assert_sample_arrays_are_read_only() -> None:
    sample = EmpiricalSample.from_values([2.0, 1.0])
    try:
        sample.values[0] = 10.0
    except ValueError:
        pass
    else:
        raise AssertionError("sample values must be immutable")
    if math.isfinite(Exponential(1.0).support_max):
        raise AssertionError("exponential support is unbounded")
    if sample.support_max != 2.0 or not sample.is_bounded:
        raise AssertionError("sample support ends at its largest income")


def main() -> None:
    assert_quantile_cdf_mean_examples()
    assert_csv_ingestion()
    assert_load_sample_file()
    assert_csv_rows_are_file_lines()
    assert_undecodable_file_is_a_sample_error()
    assert_lognormal_matches_scipy()
    assert_partial_integrals_add_up()
    assert_mean_matches_quadrature()
    assert_cdf_inverts_quantile()
    assert_scaling()
    assert_domain_errors()
    assert_sample_arrays_are_read_only()
    print("distributions test passed")


if __name__ == "__main__":
    main()
