"""Bessel functions J_nu, K_nu of integer order and their radial integrals.

Values come from scipy.special (Amos/Cephes); this module adds the domain
contract, recurrence-based derivatives and the closed-form integrals

    int_0^rho   r J_nu(U r/rho)^2 dr =  rho^2/2 (J_nu(U)^2 - J_{nu+1}(U) J_{nu-1}(U))
    int_rho^inf r K_nu(W r/rho)^2 dr = -rho^2/2 (K_nu(W)^2 - K_{nu+1}(W) K_{nu-1}(W))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

MAX_ORDER = 26
MAX_ARGUMENT = 100.0


def _check(nu, x) -> np.ndarray:
    if int(nu) != nu or abs(nu) > MAX_ORDER:
        raise DomainError(f"order {nu!r} outside supported range |nu| <= {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(x > MAX_ARGUMENT):
        raise DomainError(f"argument outside (0, {MAX_ARGUMENT}]")
    return x


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def bessel_j(nu: int, x):
    """J_nu(x) for integer nu; scalar or array argument."""
    x = _check(nu, x)
    return _out(special.jv(int(nu), x))


def bessel_k(nu: int, x):
    """K_nu(x) for integer nu (K_{-nu} = K_nu)."""
    x = _check(nu, x)
    return _out(special.kv(abs(int(nu)), x))


def bessel_j_prime(nu: int, x):
    """J'_nu(x) = (J_{nu-1}(x) - J_{nu+1}(x)) / 2."""
    x = _check(nu, x)
    nu = int(nu)
    return _out(0.5 * (special.jv(nu - 1, x) - special.jv(nu + 1, x)))


def bessel_k_prime(nu: int, x):
    """K'_nu(x) = -(K_{nu-1}(x) + K_{nu+1}(x)) / 2."""
    x = _check(nu, x)
    nu = int(nu)
    return _out(-0.5 * (special.kv(abs(nu - 1), x) + special.kv(abs(nu + 1), x)))


@dataclass(frozen=True)
class BesselEval:
    """One evaluated Bessel value together with its derivative."""

    order: int
    argument: float
    value: float
    derivative: float

    @classmethod
    def j(cls, nu: int, x: float) -> "BesselEval":
        return cls(int(nu), float(x), bessel_j(nu, x), bessel_j_prime(nu, x))

    @classmethod
    def k(cls, nu: int, x: float) -> "BesselEval":
        return cls(int(nu), float(x), bessel_k(nu, x), bessel_k_prime(nu, x))


def radial_j_square_integral(nu: int, U: float, rho: float) -> float:
    """int_0^rho r J_nu(U r / rho)^2 dr in closed form."""
    if not rho > 0:
        raise DomainError("core radius must be positive")
    U = _check(nu, U)
    nu = int(nu)
    jn = special.jv(nu, U)
    return _out(0.5 * rho**2 * (jn * jn - special.jv(nu + 1, U) * special.jv(nu - 1, U)))


def radial_k_square_integral(nu: int, W: float, rho: float) -> float:
    """int_rho^inf r K_nu(W r / rho)^2 dr in closed form (always positive)."""
    if not rho > 0:
        raise DomainError("core radius must be positive")
    W = _check(nu, W)
    nu = int(nu)
    kn = special.kv(abs(nu), W)
    return _out(-0.5 * rho**2 * (kn * kn - special.kv(abs(nu + 1), W) * special.kv(abs(nu - 1), W)))
