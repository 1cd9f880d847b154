"""The extended negative binomial distribution NB(lambda, 2 beta; m).

``p_k = gamma_k (1 - lambda)^(2(beta - m)) lambda^|m-k| [P_min(m,k)^(|m-k|, nu)(1 - 2 lambda)]^2``
with ``nu = 2(beta - m) - 1`` and the Gamma-ratio prefactor

``gamma_k = min(m,k)! Gamma(2 beta - m + (k-m)_+) / (max(m,k)! Gamma(2 beta - m - (m-k)_+))``.

For ``m = 0`` this is the ordinary negative binomial law with shape ``2 beta``
and success parameter ``lambda``.

Moments are computed by direct summation, which is the reference for every
closed-form expression exposed here.  The closed forms come in two flavours:
the stated expressions (``mean_closed``, ``variance_closed_claim``,
``second_moment_claim``, ``mandel_q``, ``critical_lambda``), and expressions obtained by differentiating the
closed-form generating function (``variance_closed``, ``mandel_q_pgf``,
``critical_lambda_pgf``).  The stated variance and Mandel parameter do not
match the series for ``m >= 1``; the generating-function ones do.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .bergman import SpaceParams, validate_space
from .errors import ConvergenceError, DegenerateError, DomainError
from .specfun import jacobi, log_gamma_ratio

__all__ = [
    "DistParams",
    "PmfTable",
    "Verdict",
    "StatClassification",
    "max_terms",
    "pmf",
    "pmf_table",
    "cdf",
    "quantile",
    "sample",
    "pgf_closed",
    "pgf_series",
    "series_sum",
    "moments",
    "mean_closed",
    "variance_closed",
    "variance_closed_claim",
    "second_moment_claim",
    "mandel_q",
    "mandel_q_pgf",
    "mandel_q_series",
    "critical_lambda",
    "critical_lambda_pgf",
    "classify",
]

DEFAULT_MAX_TERMS = 100_000
SAMPLER_COVERAGE = 1.0 - 1e-12
_CHUNK = 512
# Consecutive small, decreasing terms required before a series is cut.
_QUIET_RUN = 8


def max_terms() -> int:
    """Hard cap on summation length; ``GNB_MAX_TERMS`` overrides the default."""
    raw = os.environ.get("GNB_MAX_TERMS")
    if raw is None:
        return DEFAULT_MAX_TERMS
    value = int(raw)
    if value < 1:
        raise DomainError(f"GNB_MAX_TERMS must be positive, got {raw!r}")
    return value


@dataclass(frozen=True)
class DistParams:
    """One member ``(lambda, beta, m)`` of the family.

    ``lam = 0`` is accepted as the degenerate limit (a point mass at ``m``).
    """

    lam: float
    beta: float
    m: int

    def __post_init__(self):
        validate_space(self.beta, self.m)
        if not (math.isfinite(self.lam) and 0.0 <= self.lam < 1.0):
            raise DomainError("lambda must lie in [0, 1)")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "m", int(self.m))

    @classmethod
    def from_disk(cls, beta: float, m: int, z: complex) -> "DistParams":
        return cls(abs(z) ** 2, beta, m)

    @property
    def nu(self) -> float:
        return 2.0 * (self.beta - self.m) - 1.0

    @property
    def space(self) -> SpaceParams:
        return SpaceParams(self.beta, self.m)

    @property
    def degenerate(self) -> bool:
        return self.lam == 0.0


# ---------------------------------------------------------------------------
# mass function
# ---------------------------------------------------------------------------


def _log_prefactor_below(params: DistParams, k: int) -> float:
    # k < m: gamma_k = k! Gamma(2 beta - m) / (m! Gamma(2 beta - 2m + k))
    m, beta = params.m, params.beta
    return log_gamma_ratio(k + 1.0, m + 1.0) + log_gamma_ratio(2 * beta - m, 2 * beta - 2 * m + k)


def _pmf_below(params: DistParams, k: int) -> float:
    """Mass at ``k < m`` (Jacobi degree k, first parameter m - k)."""
    m, lam = params.m, params.lam
    poly = jacobi(k, m - k, params.nu, 1.0 - 2.0 * lam)
    if poly == 0.0:
        return 0.0
    log_p = (
        _log_prefactor_below(params, k)
        + 2.0 * (params.beta - m) * math.log1p(-lam)
        + (m - k) * math.log(lam)
        + 2.0 * math.log(abs(poly))
    )
    return math.exp(log_p)


def _pmf_above(params: DistParams, ks: np.ndarray) -> np.ndarray:
    """Mass at ``k >= m`` (Jacobi degree m, first parameter k - m), vectorised in k."""
    m, beta, lam = params.m, params.beta, params.lam
    gap = (ks - m).astype(float)
    log_gamma = log_gamma_ratio(m + 1.0, ks + 1.0) + log_gamma_ratio(2 * beta - 2 * m + ks, 2 * beta - m)
    log_gamma = np.asarray(log_gamma, dtype=float)
    poly = np.asarray(jacobi(m, gap, params.nu, 1.0 - 2.0 * lam), dtype=float)
    with np.errstate(divide="ignore"):
        log_p = (
            log_gamma
            + 2.0 * (beta - m) * math.log1p(-lam)
            + gap * math.log(lam)
            + 2.0 * np.log(np.abs(poly))
        )
    return np.where(poly == 0.0, 0.0, np.exp(log_p))


def _pmf_array(params: DistParams, ks: np.ndarray) -> np.ndarray:
    ks = np.asarray(ks, dtype=np.int64)
    out = np.zeros(ks.shape, dtype=float)
    if params.degenerate:
        out[ks == params.m] = 1.0
        return out
    m = params.m
    # the Jacobi degree (m + k - |m - k|)/2 is min(m, k) on both branches
    assert np.all((m + ks - np.abs(m - ks)) // 2 == np.minimum(m, ks))
    above = ks >= m
    if np.any(above):
        out[above] = _pmf_above(params, ks[above])
    for idx in np.flatnonzero((ks >= 0) & ~above):
        out[idx] = _pmf_below(params, int(ks[idx]))
    return out


def pmf(params: DistParams, k):
    """Probability of ``k`` counts; ``k`` may be an int or an integer array.

    Gamma-ratio prefactors are combined in log space, so the mass stays finite
    for ``k`` in the tens of thousands.  Negative ``k`` has zero mass.
    """
    if np.ndim(k) == 0:
        if int(k) != k:
            raise DomainError(f"k must be an integer, got {k}")
        return float(_pmf_array(params, np.array([int(k)]))[0])
    return _pmf_array(params, np.asarray(k))


def _pmf_chunks(params: DistParams, start: int = 0, chunk: int = _CHUNK):
    for lo in itertools.count(start, chunk):
        ks = np.arange(lo, lo + chunk)
        yield ks, _pmf_array(params, ks)


# ---------------------------------------------------------------------------
# tables, cdf, quantile, sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PmfTable:
    """Rows ``(k, pmf_k, cdf_k)`` from ``k = 0`` until the requested coverage.

    ``tail_bound`` is ``1 - cdf`` of the last row: the mass not listed.
    """

    params: DistParams
    k: np.ndarray = field(repr=False)
    pmf: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    tail_bound: float

    def __post_init__(self):
        for arr in (self.k, self.pmf, self.cdf):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.k)

    @property
    def rows(self) -> list[tuple[int, float, float]]:
        return [(int(k), float(p), float(c)) for k, p, c in zip(self.k, self.pmf, self.cdf)]


def pmf_table(params: DistParams, coverage: float = 0.999, cap: int | None = None) -> PmfTable:
    """Tabulate the distribution until the cumulative mass reaches ``coverage``.

    Raises:
        ConvergenceError: if more than ``cap`` rows (default :func:`max_terms`)
            would be needed.
    """
    if not 0.0 < coverage <= 1.0:
        raise DomainError(f"coverage must lie in (0, 1], got {coverage}")
    cap = max_terms() if cap is None else cap
    # cumulative sums of a normalised law can round to just under 1
    target = min(coverage, 1.0 - 4.0 * np.finfo(float).eps)
    k_parts, p_parts, c_parts = [], [], []
    seen: list[float] = []
    for ks, masses in _pmf_chunks(params):
        cum = math.fsum(seen) + np.cumsum(masses)
        hit = np.flatnonzero(cum >= target)
        stop = int(hit[0]) + 1 if hit.size else len(ks)
        if ks[stop - 1] + 1 > cap:
            reached = float(cum[cap - 1 - int(ks[0])]) if cap > ks[0] else math.fsum(seen)
            raise ConvergenceError(
                f"coverage {coverage} not reached within {cap} terms (cumulative {reached:.15g})"
            )
        k_parts.append(ks[:stop])
        p_parts.append(masses[:stop])
        c_parts.append(cum[:stop])
        if hit.size:
            break
        seen.extend(masses.tolist())
    cdf_col = np.minimum(np.concatenate(c_parts), 1.0)
    tail = max(0.0, 1.0 - float(cdf_col[-1]))
    return PmfTable(params, np.concatenate(k_parts), np.concatenate(p_parts), cdf_col, tail)


@functools.lru_cache(maxsize=64)
def _cached_table(params: DistParams, coverage: float, cap: int) -> PmfTable:
    return pmf_table(params, coverage, cap)


def cdf(params: DistParams, k: int) -> float:
    """``P(X <= k)``; zero for negative ``k``."""
    if k < 0:
        return 0.0
    cap = max_terms()
    if k + 1 <= cap:
        return min(1.0, math.fsum(_pmf_array(params, np.arange(k + 1)).tolist()))
    return min(1.0, series_sum(params, lambda ks: np.ones(ks.shape), tol=1e-17))


def quantile(params: DistParams, p: float, cap: int | None = None) -> int:
    """Smallest ``k`` with ``cdf(k) >= p``.

    For ``p = 0`` this is the smallest count carrying positive mass.
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    cap = max_terms() if cap is None else cap
    acc: list[float] = []
    for ks, masses in _pmf_chunks(params):
        for k, mass in zip(ks.tolist(), masses.tolist()):
            if k >= cap:
                raise ConvergenceError(f"quantile {p} not reached within {cap} terms")
            acc.append(mass)
            if p == 0.0:
                if mass > 0.0:
                    return k
            elif math.fsum(acc) >= p:
                return k
    raise AssertionError("unreachable")


def sample(params: DistParams, uniforms, n: int | None = None) -> np.ndarray:
    """Inverse-transform draws driven by caller-supplied uniforms on [0, 1).

    The result is a deterministic function of ``params`` and the uniforms.  A
    cached table with coverage ``1 - 1e-12`` backs the inversion; uniforms
    falling in the untabulated tail map to the last tabulated count.

    Args:
        params: distribution parameters.
        uniforms: iterable of floats in [0, 1).
        n: number of draws; by default the whole iterable is consumed.
    """
    stream = uniforms if n is None else itertools.islice(uniforms, n)
    u = np.fromiter(stream, dtype=float)
    if n is not None and len(u) < n:
        raise DomainError(f"uniform stream exhausted after {len(u)} of {n} values")
    if np.any((u < 0.0) | (u >= 1.0)):
        raise DomainError("uniform variates must lie in [0, 1)")
    table = _cached_table(params, SAMPLER_COVERAGE, max_terms())
    idx = np.searchsorted(table.cdf, u, side="left")
    idx = np.minimum(idx, len(table) - 1)
    return table.k[idx]


# ---------------------------------------------------------------------------
# series machinery
# ---------------------------------------------------------------------------


def series_sum(params: DistParams, weight, tol: float = 1e-15, cap: int | None = None) -> float:
    """``sum_k weight(k) p_k`` truncated adaptively.

    ``weight`` maps an integer array of counts to a float array.  Summation
    stops once ``k > m + 10`` and the last several terms are all below
    ``tol`` times the running sum while the mass is decreasing; terms decay
    geometrically (ratio about ``lambda``) from there on.

    Raises:
        ConvergenceError: if the cap is reached first.
    """
    cap = max_terms() if cap is None else cap
    terms: list[float] = []
    running = 0.0
    quiet = 0
    prev_mass = math.inf
    for ks, masses in _pmf_chunks(params):
        contrib = np.asarray(weight(ks), dtype=float) * masses
        for k, mass, term in zip(ks.tolist(), masses.tolist(), contrib.tolist()):
            if k >= cap:
                raise ConvergenceError(f"series did not settle within {cap} terms")
            terms.append(term)
            running += term
            if k > params.m + 10 and mass <= prev_mass and abs(term) <= tol * abs(running):
                quiet += 1
            else:
                quiet = 0
            prev_mass = mass
            if quiet >= _QUIET_RUN:
                return math.fsum(terms)
    raise AssertionError("unreachable")


def pgf_series(params: DistParams, xi: float, tol: float = 1e-15) -> float:
    """Generating function ``sum_k xi^k p_k`` by direct summation (``|xi| < 1/lambda``)."""
    if params.lam * abs(xi) >= 1.0:
        raise DomainError(f"series diverges for |xi| >= 1/lambda, got xi={xi}")
    if xi == 0.0:
        return pmf(params, 0)
    return series_sum(params, lambda ks: np.power(float(xi), ks.astype(float)), tol)


def pgf_closed(params: DistParams, xi: float) -> float:
    """Closed-form generating function.

    ``((1-l)/(1-l xi))^(2b) * ((l-xi)(1-l xi)/(1-l)^2)^m * P_m^(nu,0)(1 + 2 xi (1-l)^2 / ((l-xi)(1-l xi)))``

    The written form has removable singularities at ``xi = lambda`` and
    ``xi = 1/lambda``; those points are rejected (use :func:`pgf_series`).
    """
    lam, m = params.lam, params.m
    if abs(xi) > 1.0:
        raise DomainError(f"closed form is provided for |xi| <= 1, got {xi}")
    denom = (lam - xi) * (1.0 - lam * xi)
    if denom == 0.0:
        raise DomainError(f"xi={xi} is a removable singularity of the closed form; use pgf_series")
    one_minus = 1.0 - lam
    lead = (one_minus / (1.0 - lam * xi)) ** (2.0 * params.beta)
    poly = jacobi(m, params.nu, 0.0, 1.0 + 2.0 * xi * one_minus**2 / denom)
    return lead * (denom / one_minus**2) ** m * poly


# ---------------------------------------------------------------------------
# moments and photon statistics
# ---------------------------------------------------------------------------


def moments(params: DistParams, tol: float = 1e-15) -> tuple[float, float]:
    """``(mean, variance)`` by direct summation over the mass function."""
    if params.degenerate:
        return float(params.m), 0.0
    mean = series_sum(params, lambda ks: ks.astype(float), tol)
    second = series_sum(params, lambda ks: ks.astype(float) ** 2, tol)
    return mean, second - mean * mean


def mean_closed(params: DistParams) -> float:
    """Stated mean ``2 beta lambda / (1 - lambda) + m``."""
    lam = params.lam
    return 2.0 * params.beta * lam / (1.0 - lam) + params.m


def variance_closed(params: DistParams) -> float:
    """Variance from the closed-form generating function, ``G''(1) + G'(1) - G'(1)^2``.

    Equals ``2 lambda ((2m + 1) beta - m (m + 1)) / (1 - lambda)^2``.
    """
    lam, beta, m = params.lam, params.beta, params.m
    return 2.0 * lam * ((2 * m + 1) * beta - m * (m + 1)) / (1.0 - lam) ** 2


def variance_closed_claim(params: DistParams) -> float:
    """Stated variance ``[2 beta lambda + m lambda (beta - 2 - lambda/2)] / (1 - lambda)^2``.

    Kept for auditing; it disagrees with the series variance whenever ``m >= 1``.
    """
    lam, beta, m = params.lam, params.beta, params.m
    return (2.0 * beta * lam + m * lam * (beta - 2.0 - lam / 2.0)) / (1.0 - lam) ** 2


def second_moment_claim(params: DistParams) -> float:
    """Stated raw second moment ``E[X^2]``, kept for auditing.

    At ``m = 0`` it equals the factorial moment ``E[X(X-1)]`` rather than ``E[X^2]``.
    """
    lam, beta, m = params.lam, params.beta, params.m
    om2 = (1.0 - lam) ** 2
    return (
        (2.0 * beta * (2.0 * beta + 1.0) * lam**2 + 4.0 * m * (1.0 - lam) * lam * beta) / om2
        + m * (m - 1.0 - 2.0 * lam / om2)
        + m * lam * (2.0 * beta - lam) / (2.0 * om2)
    )


def mandel_q(params: DistParams) -> float:
    """Stated closed-form Mandel parameter.

    ``[(4b - 3m) l^2 + 2 b l m - 2m] / [2 (1 - l)(2 b l - m l + m)]``.  It equals
    ``variance_closed_claim / mean_closed - 1`` and so inherits that
    expression's disagreement with the series for ``m >= 1``; see
    :func:`mandel_q_pgf` and :func:`mandel_q_series`.

    Raises:
        DegenerateError: at ``lambda = 0`` where Q is 0/0.
    """
    lam, beta, m = params.lam, params.beta, params.m
    if params.degenerate:
        raise DegenerateError("Mandel Q is 0/0 at lambda = 0")
    num = (4.0 * beta - 3.0 * m) * lam**2 + 2.0 * beta * lam * m - 2.0 * m
    den = 2.0 * (1.0 - lam) * (2.0 * beta * lam - m * lam + m)
    return num / den


def mandel_q_pgf(params: DistParams) -> float:
    """Mandel parameter from :func:`variance_closed` and :func:`mean_closed`."""
    if params.degenerate:
        raise DegenerateError("Mandel Q is 0/0 at lambda = 0")
    return variance_closed(params) / mean_closed(params) - 1.0


def mandel_q_series(params: DistParams, tol: float = 1e-15) -> float:
    """Mandel parameter ``Var/E - 1`` from summed moments."""
    if params.degenerate:
        raise DegenerateError("Mandel Q is 0/0 at lambda = 0")
    mean, var = moments(params, tol)
    return var / mean - 1.0


def critical_lambda(beta: float, m: int) -> float:
    """Stated admissible root ``lambda_+`` of the Mandel numerator.

    ``[-m beta + sqrt((beta^2 - 6) m^2 + 8 beta m)] / (4 beta - 3m)``, and 0 for
    ``m = 0``.
    """
    validate_space(beta, m)
    if m == 0:
        return 0.0
    disc = (beta * beta - 6.0) * m * m + 8.0 * beta * m
    assert disc > 0.0, disc
    root = (-m * beta + math.sqrt(disc)) / (4.0 * beta - 3.0 * m)
    assert 0.0 < root < 1.0, root
    return root


def critical_lambda_pgf(beta: float, m: int) -> float:
    """Root in (0, 1) of :func:`mandel_q_pgf`: ``sqrt(m^2 + m/(2 beta - m)) - m``.

    Written as ``c / (m + sqrt(m^2 + c))`` with ``c = m/(2 beta - m)`` to avoid
    cancellation.
    """
    validate_space(beta, m)
    if m == 0:
        return 0.0
    c = m / (2.0 * beta - m)
    return c / (m + math.sqrt(m * m + c))


class Verdict(str, enum.Enum):
    SUB_POISSONIAN = "SubPoissonian"
    POISSONIAN = "Poissonian"
    SUPER_POISSONIAN = "SuperPoissonian"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class StatClassification:
    """Photon-statistics verdict with the Mandel value and threshold that produced it.

    ``critical_radius`` is ``sqrt(critical_lambda)``, the threshold expressed as
    a modulus ``|z|`` rather than ``lambda = |z|^2``.
    """

    q_value: float
    critical_lambda: float
    verdict: Verdict
    method: str = "closed"

    @property
    def critical_radius(self) -> float:
        return math.sqrt(self.critical_lambda)


_Q_METHODS = {
    "closed": (mandel_q, critical_lambda),
    "pgf": (mandel_q_pgf, critical_lambda_pgf),
    "series": (mandel_q_series, critical_lambda_pgf),
}


def classify(params: DistParams, tol_q: float = 1e-9, method: str = "closed") -> StatClassification:
    """Sub-/super-Poissonian verdict from the sign of the Mandel parameter.

    Args:
        params: distribution parameters.
        tol_q: ``|Q| <= tol_q`` counts as Poissonian.
        method: ``"closed"`` uses :func:`mandel_q` and :func:`critical_lambda`
            (the stated expressions); ``"pgf"`` and ``"series"`` use the
            generating-function closed form or summed moments, both paired with
            :func:`critical_lambda_pgf`.
    """
    try:
        q_func, crit_func = _Q_METHODS[method]
    except KeyError:
        raise DomainError(f"unknown method {method!r}; expected one of {sorted(_Q_METHODS)}") from None
    crit = crit_func(params.beta, params.m)
    if params.degenerate:
        return StatClassification(math.nan, crit, Verdict.DEGENERATE, method)
    q = q_func(params)
    if q < -tol_q:
        verdict = Verdict.SUB_POISSONIAN
    elif q > tol_q:
        verdict = Verdict.SUPER_POISSONIAN
    else:
        verdict = Verdict.POISSONIAN
    return StatClassification(q, crit, verdict, method)
