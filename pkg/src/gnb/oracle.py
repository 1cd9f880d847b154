"""Brute-force validators for the closed forms.

Each ``check_*`` function compares a closed-form expression against an
independent evaluation (direct summation, adaptive or Gauss quadrature, or the
other side of an identity) and returns a :class:`ValidationReport`.
:func:`run_suite` evaluates whole families of checks over the standard
parameter grid.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np
from scipy import integrate

from .bergman import (
    DiskPoint,
    SpaceParams,
    basis_phi,
    carrier_basis_psi,
    coherent_wavefunction,
    kernel_diagonal,
    max_level,
    norm_square_rho,
)
from .distribution import (
    DistParams,
    mandel_q,
    mandel_q_pgf,
    mean_closed,
    pgf_closed,
    pmf_table,
    second_moment_claim,
    series_sum,
    variance_closed,
    variance_closed_claim,
)
from .errors import ConvergenceError, DomainError
from .specfun import (
    gauss_laguerre,
    hyp2f1_terminating,
    jacobi,
    jacobi_recurrence,
    jacobi_series,
    log_gamma_ratio,
)

STANDARD_BETAS = (1.2, 2.5, 3.75, 6.0)
STANDARD_LAMBDAS = (0.05, 0.25, 0.5, 0.75, 0.95)
IDENTITY_NUS = (0.5, 1.0, 3.2)
IDENTITY_US = (-0.8, 0.1, 0.9)
XI_GRID = tuple(np.linspace(-0.9, 0.9, 37).tolist())
KERNEL_RADII = (0.0, 0.2, 0.4, 0.6)
CARRIER_ALPHAS = (0.75, 1.0, 2.5)


@dataclass(frozen=True)
class ValidationReport:
    check_name: str
    params_tested: str
    max_error: float
    tolerance: float
    passed: bool = field(init=False)
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.max_error <= self.tolerance))

    def to_dict(self) -> dict:
        return asdict(self)


def _rel_err(value: float, reference: float) -> float:
    scale = max(abs(value), abs(reference))
    if scale == 0.0:
        return 0.0
    return abs(value - reference) / scale


def valid_levels(beta: float) -> list[int]:
    """Landau indices admitted for ``beta`` under ``2(beta - m) > 1``."""
    return [m for m in range(max_level(beta) + 1) if 2.0 * (beta - m) > 1.0]


def standard_grid(
    betas: Iterable[float] = STANDARD_BETAS,
    lambdas: Iterable[float] = STANDARD_LAMBDAS,
    max_m: int | None = None,
) -> Iterator[DistParams]:
    """Every valid ``DistParams`` on the product grid, in a fixed order."""
    lambdas = tuple(lambdas)
    for beta in betas:
        for m in valid_levels(beta):
            if max_m is not None and m > max_m:
                continue
            for lam in lambdas:
                yield DistParams(lam, beta, m)


def aggregate(check_name: str, params_tested: str, reports: list[ValidationReport]) -> ValidationReport:
    """Collapse reports sharing a tolerance into one carrying the worst error."""
    tol = reports[0].tolerance
    assert all(r.tolerance == tol for r in reports)
    return ValidationReport(check_name, params_tested, max(r.max_error for r in reports), tol)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def series_moments(params: DistParams, order: int = 2, tol: float = 1e-15) -> list[float]:
    """Raw moments ``E[X], ..., E[X**order]`` by direct summation."""
    if not 1 <= order <= 4:
        raise DomainError(f"order must be between 1 and 4, got {order}")
    if params.degenerate:
        return [float(params.m) ** j for j in range(1, order + 1)]
    return [series_sum(params, lambda ks, j=j: ks.astype(float) ** j, tol) for j in range(1, order + 1)]


def _series_mean_var(params: DistParams) -> tuple[float, float]:
    first, second = series_moments(params, 2)
    return first, second - first * first


def check_normalization(params: DistParams, tol: float = 1e-10) -> ValidationReport:
    total = series_sum(params, lambda ks: np.ones(ks.shape))
    return ValidationReport("normalization", _describe(params), abs(total - 1.0), tol)


def check_mean_claim(params: DistParams, tol: float = 1e-8) -> ValidationReport:
    mean, _ = _series_mean_var(params)
    return ValidationReport("mean_closed", _describe(params), _rel_err(mean_closed(params), mean), tol)


def check_variance(params: DistParams, tol: float = 1e-8) -> ValidationReport:
    _, var = _series_mean_var(params)
    return ValidationReport("variance_closed", _describe(params), _rel_err(variance_closed(params), var), tol)


def check_variance_claim(params: DistParams, tol: float = 1e-8) -> ValidationReport:
    _, var = _series_mean_var(params)
    err = _rel_err(variance_closed_claim(params), var)
    note = "" if err <= tol else f"series variance {var!r} vs claimed {variance_closed_claim(params)!r}"
    return ValidationReport("variance_closed_claim", _describe(params), err, tol, note)


def check_second_moment_claim(params: DistParams, tol: float = 1e-8) -> ValidationReport:
    _, second = series_moments(params, 2)
    err = _rel_err(second_moment_claim(params), second)
    note = "" if err <= tol else f"series E[X^2] {second!r} vs claimed {second_moment_claim(params)!r}"
    return ValidationReport("second_moment_claim", _describe(params), err, tol, note)


def check_mandel_q(params: DistParams, tol: float = 1e-6, closed: Callable = mandel_q) -> ValidationReport:
    mean, var = _series_mean_var(params)
    q_series = var / mean - 1.0
    err = _rel_err(closed(params), q_series)
    name = "mandel_q" if closed is mandel_q else f"{closed.__name__}"
    note = "" if err <= tol else f"series Q {q_series!r} vs closed {closed(params)!r}"
    return ValidationReport(name, _describe(params), err, tol, note)


# ---------------------------------------------------------------------------
# generating function
# ---------------------------------------------------------------------------


def check_pgf_agreement(params: DistParams, xis: Iterable[float] = XI_GRID, tol: float = 1e-9) -> ValidationReport:
    """Closed generating function against ``sum_k p_k xi^k`` over a tabulated law.

    The table stops once the cumulative mass reaches ``1 - 1e-13``, so for
    ``|xi| <= 1`` the neglected part is below ``1e-13``.
    """
    table = pmf_table(params, coverage=1.0 - 1e-13)
    ks = table.k.astype(float)
    worst = 0.0
    for xi in xis:
        if xi == params.lam:
            continue
        series = math.fsum((table.pmf * xi**ks).tolist())
        worst = max(worst, abs(pgf_closed(params, xi) - series))
    return ValidationReport("pgf_closed_vs_series", _describe(params), worst, tol)


def check_pgf_normalization(params: DistParams, tol: float = 1e-12) -> ValidationReport:
    return ValidationReport("pgf_at_one", _describe(params), abs(pgf_closed(params, 1.0) - 1.0), tol)


def finite_sum_remainder(params: DistParams, xi: float) -> float:
    """The finite part of the split generating function, which should vanish.

    For ``k < m`` it compares the mass written with ``P_k^(m-k, nu)`` against the
    same mass written with ``P_m^(k-m, nu)`` (negative-integer first parameter)
    and sums the differences weighted by ``xi**k``.
    """
    m, beta, lam, nu = params.m, params.beta, params.lam, params.nu
    u = 1.0 - 2.0 * lam
    scale = (1.0 - lam) ** (2.0 * (beta - m))
    terms = []
    for k in range(m):
        g = math.exp(log_gamma_ratio(k + 1.0, m + 1.0) + log_gamma_ratio(2 * beta - m, 2 * beta - 2 * m + k))
        direct = g * lam ** (m - k) * jacobi(k, m - k, nu, u) ** 2
        swapped = lam ** (k - m) / g * jacobi(m, k - m, nu, u) ** 2
        terms.append(scale * xi**k * (direct - swapped))
    return math.fsum(terms)


def check_finite_sum_cancellation(params: DistParams, xis: Iterable[float] = XI_GRID, tol: float = 1e-11) -> ValidationReport:
    worst = max(abs(finite_sum_remainder(params, xi)) for xi in xis)
    return ValidationReport("finite_sum_cancellation", _describe(params), worst, tol)


def bilinear_series(beta0: float, gamma_p: int, x: float, y: float, t: float, k_max: int = 200, tol: float = 1e-17) -> float:
    """``sum_n n! t^n / (1 + beta0)_n P_n^(gamma-n, beta0)(x) P_n^(gamma-n, beta0)(y)``.

    Raises:
        ConvergenceError: if the terms have not settled below ``tol`` relative
            to the partial sum by ``k_max``.
    """
    terms = []
    quiet = 0
    weight = 1.0  # n! / (1 + beta0)_n
    for n in range(k_max + 1):
        if n:
            weight *= n / (beta0 + n)
        term = weight * t**n * jacobi(n, gamma_p - n, beta0, x) * jacobi(n, gamma_p - n, beta0, y)
        terms.append(term)
        quiet = quiet + 1 if abs(term) <= tol * abs(math.fsum(terms)) else 0
        if quiet >= 4:
            return math.fsum(terms)
    raise ConvergenceError(f"bilinear series did not settle within {k_max} terms")


def bilinear_closed(beta0: float, gamma_p: int, x: float, y: float, t: float) -> float:
    """Closed side of the bilinear generating function for integer ``gamma_p >= 0``."""
    c = 1.0 + gamma_p + beta0
    q = 1.0 - (x - 1.0) * (y - 1.0) * t / 4.0
    arg = -(x + 1.0) * (y + 1.0) * t / ((1.0 - t) * (4.0 - (x - 1.0) * (y - 1.0) * t))
    return (1.0 - t) ** gamma_p * q ** (-c) * hyp2f1_terminating(-gamma_p, c, 1.0 + beta0, arg)


def check_bilinear_identity(
    m: int, beta0: float, gamma_p: int, x: float, y: float, t: float, k_max: int = 200, tol: float = 1e-8
) -> ValidationReport:
    """Compare both sides of the Jacobi bilinear generating function.

    The series runs over ``P_n^(gamma - n, beta0)`` with the degree equal to
    the summation index, the form used when summing the generating function.
    """
    if abs(t) > 0.3:
        raise DomainError(f"|t| must not exceed 0.3, got {t}")
    if gamma_p != m:
        raise DomainError(f"gamma_p must equal m, got gamma_p={gamma_p}, m={m}")
    lhs = bilinear_series(beta0, gamma_p, x, y, t, k_max)
    rhs = bilinear_closed(beta0, gamma_p, x, y, t)
    desc = f"m={m}, beta0={beta0:g}, x={x:g}, y={y:g}, t={t:g}"
    return ValidationReport("bilinear_identity", desc, _rel_err(lhs, rhs), tol)


def pgf_via_bilinear(params: DistParams, xi: float) -> float:
    """Generating function assembled through the bilinear identity.

    With ``u = 1 - 2 lambda`` and ``t = xi / lambda``,
    ``G(xi) = Gamma(2b - m) / (m! Gamma(2b - 2m)) (1 - l)^(2(b - m)) l^m B(nu, m, u, u, t)``
    where ``B`` is :func:`bilinear_closed`.
    """
    m, beta, lam = params.m, params.beta, params.lam
    if params.degenerate or xi == lam:
        raise DomainError("the bilinear route needs lambda > 0 and xi != lambda")
    u = 1.0 - 2.0 * lam
    log_pref = (
        log_gamma_ratio(2 * beta - m, 2 * beta - 2 * m)
        - math.lgamma(m + 1.0)
        + 2.0 * (beta - m) * math.log1p(-lam)
        + m * math.log(lam)
    )
    return math.exp(log_pref) * bilinear_closed(params.nu, m, u, u, xi / lam)


def check_pgf_chain(params: DistParams, xis: Iterable[float] = XI_GRID, tol: float = 1e-9) -> ValidationReport:
    worst = 0.0
    for xi in xis:
        if xi == params.lam:
            continue
        worst = max(worst, abs(pgf_via_bilinear(params, xi) - pgf_closed(params, xi)))
    return ValidationReport("pgf_bilinear_chain", _describe(params), worst, tol)


# ---------------------------------------------------------------------------
# Jacobi identities
# ---------------------------------------------------------------------------


def check_jacobi_identity(n: int, l: int, nu: float, u: float, tol: float = 1e-10) -> ValidationReport:
    """Both sides of the lowering identity for ``P_n^(-l, nu)``, ``1 <= l <= n``."""
    if not 1 <= l <= n:
        raise DomainError(f"need 1 <= l <= n, got n={n}, l={l}")
    left = math.exp(log_gamma_ratio(n + 1.0, n - l + 1.0) - math.lgamma(l + 1.0)) * jacobi(n, -l, nu, u)
    right = (
        math.exp(log_gamma_ratio(n + nu + 1.0, n + nu - l + 1.0) - math.lgamma(l + 1.0))
        * ((u - 1.0) / 2.0) ** l
        * jacobi(n - l, l, nu, u)
    )
    desc = f"n={n}, l={l}, nu={nu:g}, u={u:g}"
    return ValidationReport("jacobi_identity", desc, _rel_err(left, right), tol)


def _jacobi_abs_sum(n: int, a: float, b: float, x: float) -> float:
    """Sum of absolute terms of the explicit Jacobi sum, the scale of its rounding error."""
    if x < 0.0:
        a, b, x = b, a, -x
    h = abs(0.5 * (x - 1.0))
    total = 0.0
    for j in range(n + 1):
        rising_a = math.prod(a + i + 1.0 for i in range(j, n))
        rising_ab = math.prod(a + b + n + 1.0 + i for i in range(j))
        total += math.comb(n, j) * abs(rising_a * rising_ab) * h**j
    return total / math.factorial(n)


def _hyp2f1_abs_sum(n: int, b: float, c: float, x: float) -> float:
    total, t = 1.0, 1.0
    for j in range(n):
        t *= abs((j - n) * (b + j) / ((c + j) * (j + 1)) * x)
        total += t
    return total


def check_jacobi_branches(n_max: int = 10, tol: float = 1e-13) -> ValidationReport:
    """Recurrence against explicit-sum evaluation of ``P_n^(a,b)`` on a fixed grid.

    The error is measured against the sum of absolute terms, which bounds the
    rounding error of the explicit sum.
    """
    worst = 0.0
    for n in range(n_max + 1):
        for a in (-0.5, 0.0, 1.5, 4.0):
            for b in IDENTITY_NUS:
                for x in (-0.95, -0.3, 0.2, 0.85, 1.0):
                    diff = abs(jacobi_recurrence(n, a, b, x) - jacobi_series(n, a, b, x))
                    worst = max(worst, diff / _jacobi_abs_sum(n, a, b, x))
    return ValidationReport("jacobi_branches", f"n<={n_max}", worst, tol)


def check_hypergeometric_jacobi(n_max: int = 8, tol: float = 1e-13) -> ValidationReport:
    """``2F1(-n, n+a+b+1; a+1; (1-x)/2) = n! Gamma(a+1)/Gamma(n+a+1) P_n^(a,b)(x)``.

    Scaled like :func:`check_jacobi_branches`, by the absolute-term sum of the 2F1.
    """
    worst = 0.0
    for n in range(n_max + 1):
        for a in IDENTITY_NUS:
            for b in (0.0, 0.7, 2.5):
                for x in IDENTITY_US:
                    z = (1.0 - x) / 2.0
                    lhs = hyp2f1_terminating(-n, n + a + b + 1.0, a + 1.0, z)
                    rhs = math.exp(math.lgamma(n + 1.0) - log_gamma_ratio(n + a + 1.0, a + 1.0)) * jacobi(n, a, b, x)
                    worst = max(worst, abs(lhs - rhs) / _hyp2f1_abs_sum(n, n + a + b + 1.0, a + 1.0, z))
    return ValidationReport("hyp2f1_vs_jacobi", f"n<={n_max}", worst, tol)


# ---------------------------------------------------------------------------
# Bergman space: kernel, norms
# ---------------------------------------------------------------------------


def kernel_series(params: SpaceParams, z: DiskPoint, tol: float = 1e-17, cap: int = 20_000) -> float:
    """``sum_k |Phi_k(z)|^2 / rho(k)``, cut once terms stay below ``tol`` of the sum past ``k = m + 10``."""
    terms = []
    running = 0.0
    quiet = 0
    for k in range(cap):
        term = abs(basis_phi(params, k, z)) ** 2 / norm_square_rho(params, k)
        terms.append(term)
        running += term
        quiet = quiet + 1 if k > params.m + 10 and term <= tol * running else 0
        if quiet >= 8:
            return math.fsum(terms)
    raise ConvergenceError(f"kernel series did not settle within {cap} terms")


def check_kernel_series(params: SpaceParams, z: DiskPoint, tol: float = 1e-6) -> ValidationReport:
    if z.r > 0.6:
        raise DomainError(f"kernel series check is restricted to |z| <= 0.6, got {z.r}")
    err = _rel_err(kernel_series(params, z), kernel_diagonal(params, z))
    return ValidationReport("kernel_series", f"beta={params.beta:g}, m={params.m}, r={z.r:g}", err, tol)


def radial_norm(params: SpaceParams, k: int, eps: float = 1e-12) -> float:
    """``2 pi int_0^(1-eps) |Phi_k(r)|^2 (1-r^2)^(2 beta - 2) r dr`` by adaptive quadrature."""

    def integrand(r):
        return abs(basis_phi(params, k, DiskPoint(r))) ** 2 * (1.0 - r * r) ** (2.0 * params.beta - 2.0) * r

    value, _ = integrate.quad(integrand, 0.0, 1.0 - eps, epsabs=0.0, epsrel=1e-12, limit=400)
    return 2.0 * math.pi * value


def check_radial_norm(params: SpaceParams, k: int, tol: float = 1e-7) -> ValidationReport:
    err = _rel_err(radial_norm(params, k), norm_square_rho(params, k))
    return ValidationReport("radial_norm", f"beta={params.beta:g}, m={params.m}, k={k}", err, tol)


# ---------------------------------------------------------------------------
# carrier space
# ---------------------------------------------------------------------------


def carrier_gram(alpha: float, k_max: int, quad_order: int = 64) -> np.ndarray:
    """Gram matrix of ``psi_0..psi_k_max`` under ``dx/x`` by Gauss-Laguerre quadrature."""
    if quad_order < k_max + 1:
        raise DomainError(f"quadrature order {quad_order} is below k_max + 1 = {k_max + 1}")
    nodes, weights = gauss_laguerre(quad_order, 2.0 * alpha - 1.0)
    # integrand / weight function: psi_j psi_k / x * x^(1 - 2 alpha) exp(x)
    inv_weight = np.exp(nodes - 2.0 * alpha * np.log(nodes))
    psi = np.array([carrier_basis_psi(k, alpha, nodes) for k in range(k_max + 1)])
    return (psi * (weights * inv_weight)) @ psi.T


def check_carrier_orthonormality(alpha: float, k_max: int = 8, quad_order: int = 64, tol: float = 1e-8) -> ValidationReport:
    gram = carrier_gram(alpha, k_max, quad_order)
    err = float(np.max(np.abs(gram - np.eye(k_max + 1))))
    return ValidationReport("carrier_orthonormality", f"alpha={alpha:g}, k_max={k_max}, order={quad_order}", err, tol)


def wavefunction_norm(params: SpaceParams, alpha: float, z: DiskPoint, k_max: int = 60, quad_order: int = 128) -> float:
    """``int_0^inf |<x|z>|^2 dx/x`` of the truncated coherent wave function."""
    nodes, weights = gauss_laguerre(quad_order, 2.0 * alpha - 1.0)
    values, _ = coherent_wavefunction(params, alpha, z, nodes, k_max)
    inv_weight = np.exp(nodes - 2.0 * alpha * np.log(nodes))
    return float(np.sum(weights * inv_weight * np.abs(values) ** 2))


def check_wavefunction_norm(params: SpaceParams, alpha: float, z: DiskPoint, tol: float = 1e-6) -> ValidationReport:
    if z.r > 0.5:
        raise DomainError(f"wave-function norm check is restricted to |z| <= 0.5, got {z.r}")
    err = abs(wavefunction_norm(params, alpha, z) - 1.0)
    desc = f"beta={params.beta:g}, m={params.m}, alpha={alpha:g}, r={z.r:g}"
    return ValidationReport("wavefunction_norm", desc, err, tol)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _describe(params: DistParams) -> str:
    return f"beta={params.beta:g}, m={params.m}, lambda={params.lam:g}"


def _suite_jacobi() -> list[ValidationReport]:
    out = []
    for nu in IDENTITY_NUS:
        for u in IDENTITY_US:
            reports = [check_jacobi_identity(n, l, nu, u) for n in range(1, 9) for l in range(1, n + 1)]
            out.append(aggregate("jacobi_identity", f"n<=8, 1<=l<=n, nu={nu:g}, u={u:g}", reports))
    out.append(check_jacobi_branches())
    out.append(check_hypergeometric_jacobi())
    return out


def _suite_pgf() -> list[ValidationReport]:
    out = []
    for params in standard_grid():
        out.append(check_pgf_agreement(params))
        out.append(check_pgf_normalization(params))
        out.append(check_pgf_chain(params))
    for beta in STANDARD_BETAS:
        for m in valid_levels(beta):
            if 1 <= m <= 4:
                reports = [check_finite_sum_cancellation(p) for p in standard_grid([beta]) if p.m == m]
                out.append(aggregate("finite_sum_cancellation", f"beta={beta:g}, m={m}, all lambda", reports))
    for m in range(5):
        reports = [
            check_bilinear_identity(m, beta0, m, x, y, t)
            for beta0 in IDENTITY_NUS
            for x, y in ((0.3, -0.2), (0.9, 0.9), (-0.7, 0.4))
            for t in (-0.3, -0.1, 0.0, 0.15, 0.3)
        ]
        out.append(aggregate("bilinear_identity", f"m={m}, |t|<=0.3", reports))
    return out


def _suite_kernel() -> list[ValidationReport]:
    out = []
    for beta in STANDARD_BETAS:
        for m in valid_levels(beta):
            space = SpaceParams(beta, m)
            out.extend(check_kernel_series(space, DiskPoint(r, 0.7)) for r in KERNEL_RADII)
    for m in valid_levels(2.5):
        space = SpaceParams(2.5, m)
        out.append(aggregate("radial_norm", f"beta=2.5, m={m}, k<=8", [check_radial_norm(space, k) for k in range(9)]))
    return out


def _suite_moments() -> list[ValidationReport]:
    out = []
    for params in standard_grid():
        out.append(check_normalization(params))
        out.append(check_mean_claim(params))
        out.append(check_variance(params))
        out.append(check_mandel_q(params, closed=mandel_q_pgf))
        out.append(check_variance_claim(params))
        out.append(check_second_moment_claim(params))
        out.append(check_mandel_q(params))
    return out


def _suite_carrier() -> list[ValidationReport]:
    out = [check_carrier_orthonormality(alpha) for alpha in CARRIER_ALPHAS]
    for beta, m in ((1.2, 0), (2.5, 1), (3.75, 2)):
        for r in (0.0, 0.3, 0.5):
            out.append(check_wavefunction_norm(SpaceParams(beta, m), 1.0, DiskPoint(r, 1.1)))
    return out


SUITES: dict[str, Callable[[], list[ValidationReport]]] = {
    "jacobi": _suite_jacobi,
    "pgf": _suite_pgf,
    "kernel": _suite_kernel,
    "moments": _suite_moments,
    "carrier": _suite_carrier,
}


def run_suite(name: str) -> list[ValidationReport]:
    """Run one named suite, or every suite for ``"all"``."""
    if name == "all":
        return [report for key in SUITES for report in SUITES[key]()]
    try:
        return SUITES[name]()
    except KeyError:
        raise DomainError(f"unknown suite {name!r}; expected 'all' or one of {sorted(SUITES)}") from None
