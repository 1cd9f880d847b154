"""Generalized weighted Bergman spaces on the Poincare disk.

The eigenspace of the magnetic Laplacian at hyperbolic Landau level ``m`` has
an orthogonal basis ``Phi_k`` (k = 0, 1, ...) written with a terminating Gauss
hypergeometric factor, explicit norm squares ``rho(k)`` and a reproducing
kernel whose diagonal is known in closed form.  Normalising the kernel
expansion gives coherent states labelled by points of the unit disk; their
coefficients carry the extended negative binomial law.

Throughout, ``nu = 2 (beta - m) - 1`` is the second Jacobi parameter.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .specfun import hyp2f1_terminating, jacobi, laguerre, log_gamma_ratio

__all__ = [
    "SpaceParams",
    "DiskPoint",
    "max_level",
    "landau_level",
    "basis_phi",
    "norm_square_rho",
    "kernel_diagonal",
    "coherent_coefficient",
    "carrier_basis_psi",
    "coherent_wavefunction",
]

TWO_PI = 2.0 * math.pi


def max_level(beta: float) -> int:
    """Largest Landau index ``floor(beta - 1/2)`` admitted for field strength ``beta``."""
    if not 2.0 * beta > 1.0:
        raise DomainError(f"2*beta must exceed 1, got beta={beta}")
    return int(math.floor(beta - 0.5))


def validate_space(beta: float, m: int) -> None:
    """Raise ``DomainError`` naming the first violated constraint on ``(beta, m)``."""
    if not math.isfinite(beta) or not 2.0 * beta > 1.0:
        raise DomainError("2*beta must exceed 1")
    if int(m) != m or m < 0:
        raise DomainError("m must be a nonnegative integer")
    if m > max_level(beta):
        raise DomainError("m must not exceed floor(beta - 1/2)")
    if not 2.0 * (beta - m) > 1.0:
        raise DomainError("2(beta-m) must exceed 1")


@dataclass(frozen=True)
class SpaceParams:
    """Field strength ``beta`` and Landau index ``m`` of one eigenspace.

    The half-integer edge ``m = beta - 1/2`` is rejected: there the norm squares
    are infinite and the kernel vanishes identically.
    """

    beta: float
    m: int

    def __post_init__(self):
        validate_space(self.beta, self.m)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "m", int(self.m))

    @property
    def nu(self) -> float:
        return 2.0 * (self.beta - self.m) - 1.0


@dataclass(frozen=True)
class DiskPoint:
    """A point ``z = r exp(i theta)`` of the open unit disk."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r < 1.0:
            raise DomainError(f"|z| must lie in [0, 1), got {self.r}")
        theta = 0.0 if self.r == 0.0 else float(self.theta) % TWO_PI
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(abs(z), cmath.phase(z))

    @classmethod
    def from_lambda(cls, lam: float, theta: float = 0.0) -> "DiskPoint":
        if not 0.0 <= lam < 1.0:
            raise DomainError(f"lambda must lie in [0, 1), got {lam}")
        return cls(math.sqrt(lam), theta)

    @property
    def lam(self) -> float:
        """Squared modulus ``|z|**2``."""
        return self.r * self.r

    @property
    def z(self) -> complex:
        return cmath.rect(self.r, self.theta)


def landau_level(params: SpaceParams) -> float:
    """Eigenvalue ``4 (beta - m) (1 - beta + m)`` of the m-th hyperbolic Landau level."""
    b = params.beta - params.m
    return 4.0 * b * (1.0 - b)


def _phase(m: int, k: int, z: DiskPoint) -> complex:
    if m == k or z.r == 0.0:
        return 1.0 + 0.0j
    return cmath.exp(-1j * (m - k) * z.theta)


def basis_phi(params: SpaceParams, k: int, z: DiskPoint) -> complex:
    """Basis function ``Phi_k`` of the level-m eigenspace evaluated at ``z``.

    ``|z|^|m-k| (1-|z|^2)^-m exp(-i(m-k) arg z) 2F1(-min(m,k), b; 1+|m-k|; |z|^2)``
    with ``b = 2 beta - m + (|m-k| - m + k)/2``.  At the origin the argument of
    ``z`` is irrelevant and the value is 1 for ``k = m`` and 0 otherwise.
    """
    if k < 0:
        raise DomainError(f"basis index must be nonnegative, got {k}")
    m = params.m
    gap = abs(m - k)
    first = -m + (m - k + gap) // 2
    assert first == -min(m, k)
    second = 2.0 * params.beta - m + (gap - m + k) / 2.0
    lam = z.lam
    radial = z.r**gap * (1.0 - lam) ** (-m) * hyp2f1_terminating(first, second, 1.0 + gap, lam)
    return radial * _phase(m, k, z)


def log_norm_square_rho(params: SpaceParams, k: int) -> float:
    """Natural log of :func:`norm_square_rho`."""
    if k < 0:
        raise DomainError(f"basis index must be nonnegative, got {k}")
    m, beta = params.m, params.beta
    gap = abs(m - k)
    below = (gap + m - k) // 2  # max(m - k, 0)
    above = (gap - m + k) // 2  # max(k - m, 0)
    args = (m - below + 1, 2 * beta - m - below, m + above + 1, 2 * beta - m + above)
    assert min(args) > 0, args
    return (
        math.log(math.pi)
        + 2.0 * math.lgamma(1.0 + gap)
        - math.log(params.nu)
        + log_gamma_ratio(args[0], args[2])
        + log_gamma_ratio(args[1], args[3])
    )


def norm_square_rho(params: SpaceParams, k: int) -> float:
    """Squared norm of ``Phi_k`` in L^2(D, (1-|z|^2)^(2 beta - 2) dmu)."""
    return math.exp(log_norm_square_rho(params, k))


def kernel_diagonal(params: SpaceParams, z: DiskPoint) -> float:
    """Reproducing kernel on the diagonal, ``(2 beta - 2m - 1)/pi * (1-|z|^2)^(-2 beta)``."""
    return params.nu / math.pi * (1.0 - z.lam) ** (-2.0 * params.beta)


def coherent_coefficient(params: SpaceParams, k: int, z: DiskPoint) -> complex:
    """Projection ``K(z,z)^(-1/2) Phi_k(z) / sqrt(rho(k))`` of the coherent state on level k.

    Its squared modulus is the extended negative binomial mass at ``lambda = |z|^2``.
    """
    phi = basis_phi(params, k, z)
    if phi == 0:
        return 0j
    log_scale = -0.5 * (math.log(kernel_diagonal(params, z)) + log_norm_square_rho(params, k))
    return phi * math.exp(log_scale)


def carrier_basis_psi(k: int, alpha: float, x):
    """Orthonormal basis of L^2((0, inf), dx/x) built from Laguerre polynomials.

    ``psi_k(x) = (Gamma(k + 2 alpha)/k!)^(-1/2) x^alpha exp(-x/2) L_k^(2 alpha - 1)(x)``.
    ``x`` may be a scalar or an array of positive reals.
    """
    if k < 0:
        raise DomainError(f"basis index must be nonnegative, got {k}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise DomainError("carrier basis is defined for x > 0 only")
    log_env = -0.5 * log_gamma_ratio(k + 2.0 * alpha, k + 1.0) + alpha * np.log(x_arr) - 0.5 * x_arr
    value = np.exp(log_env) * laguerre(k, 2.0 * alpha - 1.0, x_arr)
    if x_arr.ndim == 0:
        return float(value)
    return value


def _wavefunction_coefficient(params: SpaceParams, k: int, z: DiskPoint) -> complex:
    m, nu = params.m, params.nu
    gap = abs(m - k)
    low = min(m, k)
    lam = z.lam
    if z.r == 0.0 and gap > 0:
        return 0j
    # 2F1 -> Jacobi conversion constant low! gap! / max(m,k)! = 1 / C(max, min)
    log_mag = (
        0.5 * (math.log(math.pi) - math.log(nu))
        + (params.beta - m) * math.log1p(-lam)
        + (gap * math.log(z.r) if gap else 0.0)
        - 0.5 * log_norm_square_rho(params, k)
        - math.log(math.comb(max(m, k), low))
    )
    return math.exp(log_mag) * jacobi(low, gap, nu, 1.0 - 2.0 * lam) * _phase(m, k, z)


def coherent_wavefunction(
    params: SpaceParams,
    alpha: float,
    z: DiskPoint,
    x,
    k_max: int,
    tol: float = 1e-10,
):
    """Coherent-state wave function on the Laguerre carrier space, truncated at ``k_max``.

    Returns ``(value, tail)``.  ``value`` is complex (an array if ``x`` is);
    ``tail`` is a geometric estimate of the neglected coefficient mass built
    from the ratio of the last two coefficient moduli.

    Raises:
        ConvergenceError: if ``tail`` exceeds ``tol``.
    """
    if k_max < params.m:
        raise DomainError(f"k_max must be at least m={params.m}, got {k_max}")
    coeffs = [_wavefunction_coefficient(params, k, z) for k in range(k_max + 1)]
    x_arr = np.asarray(x, dtype=float)
    total = np.zeros(x_arr.shape, dtype=complex)
    for k, c in enumerate(coeffs):
        if c != 0:
            total = total + c * carrier_basis_psi(k, alpha, x_arr)
    tail = _geometric_tail(coeffs, params.m)
    if tail > tol:
        raise ConvergenceError(
            f"wave function tail estimate {tail:.3e} exceeds tol={tol:g} at k_max={k_max}"
        )
    if x_arr.ndim == 0:
        total = complex(total)
    return total, tail


def _geometric_tail(coeffs, m: int) -> float:
    last = abs(coeffs[-1])
    if last == 0.0:
        return 0.0
    if len(coeffs) - 1 <= m:
        return math.inf
    prev = abs(coeffs[-2])
    if prev == 0.0:
        return math.inf
    q = last / prev
    if q >= 1.0:
        return math.inf
    return last * q / (1.0 - q)
