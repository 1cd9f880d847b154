"""Special-function building blocks.

Gamma-function ratios in log space, Jacobi polynomials (including a
negative-integer upper parameter), terminating Gauss hypergeometric sums,
generalized Laguerre polynomials and Gauss-Laguerre quadrature.

All routines work in double precision.  Scalar inputs give Python floats;
``log_gamma_ratio``, ``jacobi`` and ``laguerre`` also broadcast over numpy
arrays.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "log_gamma_ratio",
    "jacobi",
    "jacobi_recurrence",
    "jacobi_series",
    "hyp2f1_terminating",
    "laguerre",
    "gauss_laguerre",
]

# Stirling-series coefficients B_{2j} / (2j (2j-1)), j = 1..8.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# Below this argument both gammas are shifted upward before Stirling is used.
_SHIFT_TO = 10.0


def _scalar_or_array(values, like_scalar):
    if like_scalar:
        return float(values)
    return values


def _log_quotient(num, den, d):
    """ln(num / den) where d = num - den; log1p only when the quotient is near 1."""
    near = np.abs(d) < 0.5 * den
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(near, np.log1p(d / den), np.log(num) - np.log(den))


def _stirling_lgamma_diff(a, b, d):
    """ln G(a) - ln G(b) for a, b >= 10 where d = a - b is passed separately.

    Every term carries an explicit factor of d so nearly equal arguments keep
    full relative accuracy.
    """
    main = (a - 0.5) * _log_quotient(a, b, d) + d * (np.log(b) - 1.0)
    ia = 1.0 / a
    ib = 1.0 / b
    corr = np.zeros_like(main)
    for j, c in enumerate(_STIRLING):
        p = 2 * j + 1
        # a**-p - b**-p == -d * sum_i a**-(p - i) * b**-(i + 1)
        s = np.zeros_like(main)
        for i in range(p):
            s = s + ia ** (p - i) * ib ** (i + 1)
        corr = corr - c * d * s
    return main + corr


def log_gamma_ratio(a, b):
    """Natural log of ``Gamma(a) / Gamma(b)`` for positive ``a`` and ``b``.

    Both arguments are shifted by the same integer until they exceed 10, and the
    difference of Stirling series is assembled so that every piece is
    proportional to ``a - b``.  This keeps the result accurate when ``a`` and
    ``b`` are close and large, where subtracting two ``lgamma`` values loses
    most of its digits.

    Raises:
        DomainError: if any ``a <= 0`` or ``b <= 0``.
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError(f"log_gamma_ratio requires positive arguments, got a={a!r}, b={b!r}")
    d = a_arr - b_arr
    shift = np.maximum(0.0, np.ceil(_SHIFT_TO - np.minimum(a_arr, b_arr)))
    out = _stirling_lgamma_diff(b_arr + shift + d, b_arr + shift, d)
    for i in range(int(_SHIFT_TO) + 1):
        active = i < shift
        if not np.any(active):
            break
        out = out - np.where(active, _log_quotient(a_arr + i, b_arr + i, d), 0.0)
    out = np.where(d == 0.0, 0.0, out)
    return _scalar_or_array(out, scalar)


def _is_negative_integer(value) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    return (v < 0) & (v == np.round(v))


def jacobi_series(n: int, alpha, beta_j, x):
    """Jacobi polynomial from its explicit terminating sum.

    Uses

        P_n^(a,b)(x) = 1/n! * sum_j C(n, j) (a+j+1)_{n-j} (a+b+n+1)_j ((x-1)/2)^j,

    which is a polynomial in ``a`` and ``b`` and therefore well defined for
    every real ``a``, including negative integers where the usual Gamma-function
    normalisation breaks down.  For ``x < 0`` the mirrored sum
    ``(-1)^n P_n^(b,a)(-x)`` is used instead, which is the same polynomial.
    Terms are accumulated with ``math.fsum``.
    """
    if n < 0:
        raise DomainError(f"Jacobi degree must be nonnegative, got {n}")
    if np.ndim(alpha) or np.ndim(beta_j) or np.ndim(x):
        func = np.frompyfunc(lambda a_, b_, x_: _jacobi_series_scalar(n, a_, b_, x_), 3, 1)
        return np.asarray(func(alpha, beta_j, x), dtype=float)
    return _jacobi_series_scalar(n, float(alpha), float(beta_j), float(x))


def _jacobi_series_scalar(n, a, b, x):
    if x < 0.0:
        # reflected sum in (x+1)/2 avoids cancellation near x = -1
        return (-1.0) ** n * _jacobi_series_scalar(n, b, a, -x)
    h = 0.5 * (x - 1.0)
    terms = []
    # (a+j+1)_{n-j} for j = n, n-1, ..., 0 built downward; (a+b+n+1)_j upward.
    rising_a = [1.0] * (n + 1)
    for j in range(n - 1, -1, -1):
        rising_a[j] = rising_a[j + 1] * (a + j + 1.0)
    rising_ab = 1.0
    hj = 1.0
    for j in range(n + 1):
        terms.append(math.comb(n, j) * rising_a[j] * rising_ab * hj)
        rising_ab *= a + b + n + 1.0 + j
        hj *= h
    value = math.fsum(terms) / math.factorial(n)
    if not math.isfinite(value):
        raise OverflowError(f"Jacobi polynomial P_{n}^({a},{b})({x}) overflows double precision")
    return value


def _recurrence_degenerate(n, alpha, beta_j) -> bool:
    ab = np.asarray(alpha, dtype=float) + np.asarray(beta_j, dtype=float)
    for k in range(2, n + 1):
        if np.any((k + ab) == 0) or np.any((2 * k + ab - 2) == 0):
            return True
    return False


def jacobi_recurrence(n: int, alpha, beta_j, x):
    """Jacobi polynomial from the standard three-term recurrence in the degree."""
    if n < 0:
        raise DomainError(f"Jacobi degree must be nonnegative, got {n}")
    alpha = np.asarray(alpha, dtype=float)
    beta_j = np.asarray(beta_j, dtype=float)
    x = np.asarray(x, dtype=float)
    scalar = alpha.ndim == 0 and beta_j.ndim == 0 and x.ndim == 0
    p_prev = np.ones(np.broadcast(alpha, beta_j, x).shape)
    if n == 0:
        return _scalar_or_array(p_prev, scalar)
    p_curr = (alpha + 1.0) + (alpha + beta_j + 2.0) * 0.5 * (x - 1.0)
    ab = alpha + beta_j
    a2b2 = alpha * alpha - beta_j * beta_j
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(2, n + 1):
            s = 2.0 * k + ab
            c1 = 2.0 * k * (k + ab) * (s - 2.0)
            c2 = (s - 1.0) * (s * (s - 2.0) * x + a2b2)
            c3 = 2.0 * (k + alpha - 1.0) * (k + beta_j - 1.0) * s
            p_prev, p_curr = p_curr, (c2 * p_curr - c3 * p_prev) / c1
    if not np.all(np.isfinite(p_curr)):
        raise OverflowError(f"Jacobi polynomial of degree {n} overflows double precision")
    return _scalar_or_array(p_curr, scalar)


def jacobi(n: int, alpha, beta_j, x):
    """Jacobi polynomial ``P_n^(alpha, beta_j)(x)``.

    The three-term recurrence is used unless ``alpha`` is a negative integer or
    one of the recurrence denominators vanishes; those cases go through the
    explicit terminating sum (:func:`jacobi_series`), which is the convention
    under which ``P_n^(-l, b)`` carries the factor ``((x-1)/2)**l``.
    """
    if n < 0:
        raise DomainError(f"Jacobi degree must be nonnegative, got {n}")
    if n >= 1 and (np.any(_is_negative_integer(alpha)) or _recurrence_degenerate(n, alpha, beta_j)):
        return jacobi_series(n, alpha, beta_j, x)
    return jacobi_recurrence(n, alpha, beta_j, x)


def hyp2f1_terminating(neg_n: int, b: float, c: float, x: float) -> float:
    """Terminating Gauss hypergeometric sum ``2F1(-n, b; c; x)``.

    Args:
        neg_n: the nonpositive integer first parameter ``-n``.
        b: second upper parameter.
        c: lower parameter.
        x: argument.

    Raises:
        DomainError: if ``neg_n > 0`` or ``c + j == 0`` for some ``j < n``.
    """
    if neg_n != int(neg_n) or neg_n > 0:
        raise DomainError(f"first parameter must be a nonpositive integer, got {neg_n}")
    n = -int(neg_n)
    if c <= 0 and c == round(c) and c >= -n + 1:
        raise DomainError(f"lower parameter c={c} hits a pole inside the terminating sum")
    terms = [1.0]
    t = 1.0
    for j in range(n):
        t *= (j - n) * (b + j) / ((c + j) * (j + 1)) * x
        terms.append(t)
    return math.fsum(terms)


def laguerre(n: int, eta, x):
    """Generalized Laguerre polynomial ``L_n^(eta)(x)`` by upward recurrence."""
    if n < 0:
        raise DomainError(f"Laguerre degree must be nonnegative, got {n}")
    if np.any(np.asarray(eta) <= -1):
        raise DomainError(f"Laguerre parameter must exceed -1, got {eta}")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0 and np.ndim(eta) == 0
    l_prev = np.ones(np.broadcast(x_arr, eta).shape)
    if n == 0:
        return _scalar_or_array(l_prev, scalar)
    l_curr = 1.0 + eta - x_arr
    for k in range(1, n):
        l_prev, l_curr = l_curr, ((2 * k + 1 + eta - x_arr) * l_curr - (k + eta) * l_prev) / (k + 1)
    return _scalar_or_array(l_curr, scalar)


def gauss_laguerre(order: int, eta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``integral_0^inf f(x) x**eta exp(-x) dx``.

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
    generalized Laguerre recurrence.  Weights come from the Christoffel sum
    ``1 / sum_j p_j(x_i)**2`` over the orthonormal polynomials rather than from
    eigenvector components, so the tiny weights at large nodes keep their
    relative accuracy.
    """
    if order < 1:
        raise DomainError(f"quadrature order must be positive, got {order}")
    if eta <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {eta}")
    i = np.arange(order, dtype=float)
    diag = 2.0 * i + eta + 1.0
    off = np.sqrt(i[1:] * (i[1:] + eta))
    nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    # x p_k = b_{k+1} p_{k+1} + (2k + eta + 1) p_k + b_k p_{k-1},  b_k = sqrt(k (k + eta))
    p_prev = np.zeros_like(nodes)
    p_curr = np.full_like(nodes, math.exp(-0.5 * gammaln(eta + 1.0)))
    total = p_curr**2
    for k in range(order - 1):
        b_next = math.sqrt((k + 1.0) * (k + 1.0 + eta))
        b_k = math.sqrt(k * (k + eta)) if k > 0 else 0.0
        p_prev, p_curr = p_curr, ((nodes - (2.0 * k + eta + 1.0)) * p_curr - b_k * p_prev) / b_next
        total = total + p_curr**2
    return nodes, 1.0 / total
