"""Runs the numerical certificates of the welfare-weight properties (`certify`).

Every certificate must pass on the standard families and on a small sample;
a check that cannot be evaluated is reported as failed without stopping the
others.
"""

import math
from dataclasses import dataclass
from unittest import mock

from welfarelens import welfare
from welfarelens.distributions import (
    Degenerate,
    Distribution,
    EmpiricalSample,
    Exponential,
    LogNormal,
    Pareto,
    Uniform,
)
from welfarelens.exceptions import DegenerateTailError
from welfarelens.quadrature import DEFAULT_REL_TOL
from welfarelens.welfare import (
    CERTIFICATES,
    CertificateStatus,
    PropositionCertificate,
    certify,
)

_FAMILIES: tuple[Distribution, ...] = (
    Degenerate(5.0),
    Uniform(0.0, 1.0),
    Exponential(1.0),
    Pareto(2.0, 1.0),
    LogNormal(0.0, 1.0),
    EmpiricalSample.from_values([1.0, 3.0]),
)


def _by_id(
    certificates: list[PropositionCertificate],
) -> dict[str, PropositionCertificate]:
    return {certificate.id: certificate for certificate in certificates}


def assert_all_certificates_pass() -> None:
    for d in _FAMILIES:
        certificates = certify(d)
        ids = [certificate.id for certificate in certificates]
        if ids != list(CERTIFICATES):
            raise AssertionError(f"{d.describe()}: unexpected order {ids}")
        failed = [c.id for c in certificates if not c.passed]
        if failed:
            raise AssertionError(f"{d.describe()}: failed {failed}")


def assert_boundary_term_vanishes() -> None:
    for d in _FAMILIES[1:5]:
        boundary = _by_id(certify(d))["boundary_term_zero"]
        if not boundary.residual < 1e-6:
            raise AssertionError(f"{d.describe()}: boundary term {boundary.residual}")


def assert_serial_and_parallel_agree() -> None:
    d = LogNormal(0.0, 1.0)
    serial = [c.as_dict() for c in certify(d, workers=1)]
    parallel = [c.as_dict() for c in certify(d, workers=4)]
    if serial != parallel:
        raise AssertionError("certificates must not depend on the worker count")
    if list(serial[0]) != ["id", "status", "residual", "description"]:
        raise AssertionError(f"unexpected certificate keys: {list(serial[0])}")


def assert_unevaluable_check_fails_alone() -> None:
    def broken(d: Distribution, rel_tol: float) -> PropositionCertificate:
        raise DegenerateTailError("degenerate tail: nothing above p")

    with mock.patch.dict(welfare.CERTIFICATES, {"limits": broken}):
        certificates = _by_id(certify(Uniform(0.0, 1.0)))
    limits = certificates.pop("limits")
    if limits.status is not CertificateStatus.FAIL:
        raise AssertionError("an unevaluable certificate must fail")
    if limits.residual != float("inf") or "not evaluated" not in limits.description:
        raise AssertionError(f"unexpected failure report: {limits}")
    if not all(certificate.passed for certificate in certificates.values()):
        raise AssertionError("one broken check must not affect the others")
    if len(certificates) != len(CERTIFICATES) - 1:
        raise AssertionError("every other certificate must still run")


@dataclass(frozen=True)
class _StalledTop(Exponential):
    """Unbounded, yet β_Z creeps down to 1/2 instead of 0 at the top ranks."""

    def upper_integral(self, p: float) -> float:
        q = 1.0 - p
        if q >= 1e-2:
            return super().upper_integral(p)
        beta = 0.5 + 0.01 * q**0.1
        return self.mean() * q / math.sqrt(beta)


def assert_limits_need_vanishing_top_weight() -> None:
    stalled = welfare._limits(_StalledTop(1.0), DEFAULT_REL_TOL)
    if stalled.passed:
        raise AssertionError(f"a β_Z stalling at 1/2 must fail: {stalled}")
    # Thin upper tails approach the limit slowly but still pass.
    for d in (Pareto(50.0, 1.0), LogNormal(0.0, 0.1), Exponential(4.0)):
        limits = welfare._limits(d, DEFAULT_REL_TOL)
        if not limits.passed:
            raise AssertionError(f"{d.describe()}: {limits}")


def assert_tolerance_is_strict() -> None:
    if welfare._certificate("flat", 0.0, 0.0, "").passed:
        raise AssertionError("a residual equal to the tolerance must fail")
    if not welfare._certificate("steep", -1e-9, 0.0, "").passed:
        raise AssertionError("a residual below the tolerance must pass")

    def plateau(p: float) -> float:
        return max(0.5, 1.0 - p)

    with mock.patch.object(welfare, "weight_zenga_star", plateau):
        decreasing = welfare._decreasing(Uniform(0.0, 1.0), DEFAULT_REL_TOL)
    if decreasing.passed or decreasing.residual != 0.0:
        raise AssertionError(f"a flat stretch is not strictly decreasing: {decreasing}")


def main() -> None:
    assert_all_certificates_pass()
    assert_boundary_term_vanishes()
    assert_serial_and_parallel_agree()
    assert_unevaluable_check_fails_alone()
    assert_limits_need_vanishing_top_weight()
    assert_tolerance_is_strict()
    print("certify test passed")


if __name__ == "__main__":
    main()
