import math

import pytest

from gnb.bergman import DiskPoint, SpaceParams
from gnb.distribution import DistParams, pgf_closed
from gnb.errors import ConvergenceError, DomainError
from gnb.specfun import jacobi
from gnb import oracle
from gnb.oracle import (
    ValidationReport,
    bilinear_closed,
    bilinear_series,
    check_bilinear_identity,
    check_carrier_orthonormality,
    check_jacobi_identity,
    check_kernel_series,
    check_mandel_q,
    check_variance,
    check_variance_claim,
    finite_sum_remainder,
    kernel_series,
    pgf_via_bilinear,
    series_moments,
)


def test_report_pass_flag_follows_error():
    assert ValidationReport("x", "p", 1e-9, 1e-8).passed
    assert ValidationReport("x", "p", 1e-8, 1e-8).passed
    assert not ValidationReport("x", "p", 2e-8, 1e-8).passed
    assert not ValidationReport("x", "p", math.nan, 1e-8).passed
    d = ValidationReport("x", "p", 0.0, 1.0).to_dict()
    assert list(d) == ["check_name", "params_tested", "max_error", "tolerance", "passed", "note"]


def test_series_moments_examples():
    first, second = series_moments(DistParams(0.5, 1.0, 0), 2)
    assert first == pytest.approx(2.0, rel=1e-13)
    assert second - first**2 == pytest.approx(4.0, rel=1e-12)
    assert series_moments(DistParams(0.0, 3.75, 2), 4) == [2.0, 4.0, 8.0, 16.0]
    with pytest.raises(DomainError):
        series_moments(DistParams(0.5, 1.0, 0), 5)


def test_series_moments_higher_orders_m0():
    # negative binomial with r = 2 beta, p = 1 - lambda: E[X(X-1)(X-2)] = r(r+1)(r+2) (l/(1-l))^3
    lam, beta = 0.3, 2.5
    r, odds = 2 * beta, lam / (1 - lam)
    m1, m2, m3, _ = series_moments(DistParams(lam, beta, 0), 4)
    assert m3 - 3 * m2 + 2 * m1 == pytest.approx(r * (r + 1) * (r + 2) * odds**3, rel=1e-12)


@pytest.mark.parametrize("nu", [0.5, 1.0, 3.2])
@pytest.mark.parametrize("u", [-0.8, 0.1, 0.9])
def test_jacobi_identity_degree_one(nu, u):
    report = check_jacobi_identity(1, 1, nu, u)
    assert report.passed
    assert report.max_error < 1e-15


def test_jacobi_identity_at_endpoint():
    for n in range(1, 6):
        for l in range(1, n + 1):
            assert check_jacobi_identity(n, l, 2.0, 1.0).max_error == 0.0


def test_jacobi_identity_preconditions():
    with pytest.raises(DomainError):
        check_jacobi_identity(2, 0, 1.0, 0.3)
    with pytest.raises(DomainError):
        check_jacobi_identity(2, 3, 1.0, 0.3)


def test_bilinear_trivial_cases():
    assert check_bilinear_identity(0, 1.0, 0, 0.3, 0.2, 0.0).max_error == 0.0
    # m = gamma = 0: sum_n n! t^n / (1 + b)_n P_n^(-n, b)(x) P_n^(-n, b)(y)
    report = check_bilinear_identity(0, 1.5, 0, 0.4, -0.3, 0.25)
    assert report.passed


def test_bilinear_preconditions():
    with pytest.raises(DomainError):
        check_bilinear_identity(1, 1.0, 1, 0.2, 0.2, 0.31)
    with pytest.raises(DomainError):
        check_bilinear_identity(1, 1.0, 2, 0.2, 0.2, 0.1)


def test_bilinear_series_needs_enough_terms():
    with pytest.raises(ConvergenceError):
        bilinear_series(1.0, 2, 0.5, 0.5, 0.3, k_max=3)


def test_bilinear_identity_with_fixed_degree_fails():
    # holding the Jacobi degree at m instead of the summation index breaks the identity
    m, beta0, x, y, t = 1, 1.0, 0.3, -0.2, 0.2
    fixed = sum(
        math.factorial(n) * t**n / math.exp(math.lgamma(1 + beta0 + n) - math.lgamma(1 + beta0))
        * jacobi(m, m - n, beta0, x) * jacobi(m, m - n, beta0, y)
        for n in range(60)
    )
    closed = bilinear_closed(beta0, m, x, y, t)
    assert abs(fixed - closed) > 1e-3 * abs(closed)


@pytest.mark.parametrize("beta,m,lam", [(2.5, 1, 0.3), (3.75, 3, 0.6), (6.0, 5, 0.05), (1.2, 0, 0.5)])
def test_pgf_derivation_chain(beta, m, lam):
    params = DistParams(lam, beta, m)
    for xi in (-0.7, -0.1, 0.2, 0.9, 1.0):
        assert pgf_via_bilinear(params, xi) == pytest.approx(pgf_closed(params, xi), rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("beta,m,lam", [(2.5, 1, 0.3), (3.75, 3, 0.6), (6.0, 4, 0.95)])
def test_finite_sum_vanishes(beta, m, lam):
    params = DistParams(lam, beta, m)
    for xi in (-0.9, 0.0, 0.5, 1.0):
        assert abs(finite_sum_remainder(params, xi)) < 1e-11


def test_finite_sum_empty_for_ground_level():
    assert finite_sum_remainder(DistParams(0.4, 2.5, 0), 0.7) == 0.0


def test_kernel_series_examples():
    space = SpaceParams(2.5, 1)
    assert kernel_series(space, DiskPoint(0.0)) == pytest.approx(space.nu / math.pi, rel=1e-15)
    assert check_kernel_series(space, DiskPoint(0.4, 1.0)).passed
    ground = SpaceParams(1.2, 0)
    r = 0.5
    assert kernel_series(ground, DiskPoint(r)) == pytest.approx(ground.nu / math.pi * (1 - r * r) ** -2.4, rel=1e-12)
    with pytest.raises(DomainError):
        check_kernel_series(space, DiskPoint(0.7))


def test_carrier_orthonormality_examples():
    for alpha in (0.75, 1.0, 2.5):
        assert check_carrier_orthonormality(alpha, 8, 64).passed
    gram = oracle.carrier_gram(1.0, 0, 4)
    assert gram[0, 0] == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        check_carrier_orthonormality(1.0, 8, 8)


def test_claim_audits_flag_excited_levels():
    ground = DistParams(0.3, 2.5, 0)
    excited = DistParams(0.3, 2.5, 1)
    assert check_variance_claim(ground).passed
    assert not check_variance_claim(excited).passed
    assert "series variance" in check_variance_claim(excited).note
    assert check_variance(excited).passed
    assert check_mandel_q(ground).passed
    assert not check_mandel_q(excited).passed


def test_reports_are_reproducible():
    first = [r.max_error for r in oracle.run_suite("jacobi")]
    second = [r.max_error for r in oracle.run_suite("jacobi")]
    assert first == second


def test_standard_grid():
    grid = list(oracle.standard_grid())
    assert len(grid) == 65
    assert {(p.beta, p.m) for p in grid if p.beta == 2.5} == {(2.5, 0), (2.5, 1)}
    assert oracle.valid_levels(6.0) == [0, 1, 2, 3, 4, 5]


@pytest.mark.parametrize("suite", ["jacobi", "pgf", "kernel", "carrier"])
def test_library_suites_pass(suite):
    failed = [r for r in oracle.run_suite(suite) if not r.passed]
    assert not failed


def test_moments_suite_fails_only_on_stated_claims():
    reports = oracle.run_suite("moments")
    failed = {r.check_name for r in reports if not r.passed}
    assert failed == {"variance_closed_claim", "second_moment_claim", "mandel_q"}
    for r in reports:
        if r.check_name in ("variance_closed_claim", "mandel_q") and "m=0," in r.params_tested:
            assert r.passed


def test_unknown_suite():
    with pytest.raises(DomainError):
        oracle.run_suite("bogus")
