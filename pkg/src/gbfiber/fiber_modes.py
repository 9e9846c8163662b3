"""Gauge-fixed modes of a step-index fiber.

Units: lengths in micrometres, c = 1, angular frequency omega in rad/um.
A mode is written in the local frame (e_t, e_par, e_+, e_-) as

    A = sum_mu a_mu(r) e^mu exp(i(beta z + m theta - omega t)),
    a_mu(r) = q[row, mu] * Z_nu(x r / rho) / Z_m(x),

with Z = J, x = U in the core (row 0) and Z = K, x = W in the cladding
(row 1); the Bessel order nu is m, m, m+1, m-1 for the columns t, par, +, -.
The momentum coefficients p use the same profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import DomainError, SolverError

SQRT2 = np.sqrt(2.0)
B_LO = 1e-9
B_HI = 1.0 - 1e-9
SCAN_INTERVALS = 2000
MAX_AZIMUTHAL = 25


class Family(str, Enum):
    PHYSICAL = "physical"
    GAUGE = "gauge"
    GHOST = "ghost"


@dataclass(frozen=True)
class FiberSpec:
    """Step-index fiber: core index n1, cladding index n2, core radius rho [um]."""

    n_core: float
    n_clad: float
    core_radius: float

    def __post_init__(self):
        if not (self.n_core > 0 and self.n_clad > 0 and self.core_radius > 0):
            raise DomainError("indices and core radius must be positive")

    @property
    def numerical_aperture(self) -> float:
        if self.n_core <= self.n_clad:
            raise DomainError("guiding requires n_core > n_clad")
        return float(np.sqrt(self.n_core**2 - self.n_clad**2))

    def scaled(self, factor: float) -> "FiberSpec":
        """Fiber with both indices multiplied by factor."""
        return FiberSpec(self.n_core * factor, self.n_clad * factor, self.core_radius)


# fiber used for the mode diagrams: n1 = 1.4712, n2 = 1.4659, rho = 4.1 um
REFERENCE_FIBER = FiberSpec(1.4712, 1.4659, 4.1)


def omega_from_wavelength(wavelength_um: float) -> float:
    """Vacuum wavelength in um -> omega in rad/um."""
    if not wavelength_um > 0:
        raise DomainError("wavelength must be positive")
    return 2.0 * np.pi / wavelength_um


def normalized_frequency(spec: FiberSpec, omega: float) -> float:
    """V = rho omega sqrt(n1^2 - n2^2)."""
    if not omega > 0:
        raise DomainError("omega must be positive")
    return spec.core_radius * omega * spec.numerical_aperture


def omega_from_v(spec: FiberSpec, V: float) -> float:
    return V / (spec.core_radius * spec.numerical_aperture)


@dataclass(frozen=True)
class ModeKey:
    family: Family
    beta: float
    m: int
    kappa: int

    def __post_init__(self):
        if self.kappa < 1:
            raise DomainError("radial index kappa is 1-based")


@dataclass(frozen=True)
class DispersionPoint:
    """A point (omega, beta) of the guided window, with derived parameters."""

    omega: float
    beta: float
    b: float
    V: float
    U: float
    W: float
    m_tilde: float

    @property
    def effective_index(self) -> float:
        return abs(self.beta / self.omega)


def point_from_b(spec: FiberSpec, m: int, omega: float, b: float) -> DispersionPoint:
    """Dispersion point at frequency omega and normalized guide index b."""
    if not 0.0 < b < 1.0:
        raise DomainError(f"b = {b!r} outside the guided window (0, 1)")
    n1, n2 = spec.n_core, spec.n_clad
    V = normalized_frequency(spec, omega)
    beta = omega * np.sqrt(b * n1**2 + (1.0 - b) * n2**2)
    U = V * np.sqrt(1.0 - b)
    W = V * np.sqrt(b)
    m_tilde = m * (beta / omega) * (U**-2 + W**-2)
    return DispersionPoint(float(omega), float(beta), float(b), float(V), float(U), float(W), float(m_tilde))


def point_from_beta(spec: FiberSpec, m: int, omega: float, beta: float) -> DispersionPoint:
    """Dispersion point at (omega, beta); requires n2^2 w^2 < beta^2 < n1^2 w^2."""
    n1, n2 = spec.n_core, spec.n_clad
    if not omega > 0:
        raise DomainError("omega must be positive")
    ratio = (beta / omega) ** 2
    if not n2**2 < ratio < n1**2:
        raise DomainError("beta outside the guided window n2^2 w^2 < beta^2 < n1^2 w^2")
    b = (ratio - n2**2) / (n1**2 - n2**2)
    pt = point_from_b(spec, m, omega, b)
    return replace(pt, beta=float(beta))


def point_at_fixed_beta(spec: FiberSpec, m: int, beta: float, b: float) -> DispersionPoint:
    """Dispersion point with propagation constant beta and guide index b."""
    n1, n2 = spec.n_core, spec.n_clad
    omega = beta / np.sqrt(b * n1**2 + (1.0 - b) * n2**2)
    return replace(point_from_b(spec, m, omega, b), beta=float(beta))


# ---------------------------------------------------------------------------
# pole-free dispersion functions


def _bessel_blocks(m: int, U, W):
    """J_m, J'_m at U and K_m, K'_m at W (array friendly)."""
    jm = special.jv(m, U)
    jp = 0.5 * (special.jv(m - 1, U) - special.jv(m + 1, U))
    km = special.kv(m, W)
    kp = -0.5 * (special.kv(m - 1, W) + special.kv(m + 1, W))
    return jm, jp, km, kp


def _dispersion_terms(spec: FiberSpec, m: int, U, W, beta_over_omega):
    """Return the building blocks x = J'K/U, y = JK'/W and m~ J K."""
    if abs(m) > MAX_AZIMUTHAL:
        raise DomainError(f"|m| must not exceed {MAX_AZIMUTHAL}")
    jm, jp, km, kp = _bessel_blocks(m, U, W)
    x = jp * km / U
    y = jm * kp / W
    mt_jk = m * beta_over_omega * (U**-2 + W**-2) * jm * km
    return x, y, mt_jk, (jm, jp, km, kp)


def _d1(spec, m, U, W, bo):
    x, y, mt_jk, _ = _dispersion_terms(spec, m, U, W, bo)
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    value = (x + y) * (n1s * x + n2s * y) - mt_jk**2
    scale = (np.abs(x) + np.abs(y)) * (n1s * np.abs(x) + n2s * np.abs(y)) + mt_jk**2
    return value, scale


def _d2(spec, m, U, W, bo):
    _, _, _, (jm, jp, km, kp) = _dispersion_terms(spec, m, U, W, bo)
    value = U * W * (U * jp * km - W * jm * kp)
    scale = U * W * (np.abs(U * jp * km) + np.abs(W * jm * kp))
    return value, scale


def _te_factor(spec, m, U, W, bo):
    x, y, _, _ = _dispersion_terms(spec, m, U, W, bo)
    return x + y, np.abs(x) + np.abs(y)


def _tm_factor(spec, m, U, W, bo):
    x, y, _, _ = _dispersion_terms(spec, m, U, W, bo)
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    return n1s * x + n2s * y, n1s * np.abs(x) + n2s * np.abs(y)


def dispersion_D1(spec: FiberSpec, m: int, omega: float, beta: float) -> float:
    """Physical-mode determinant factor

        D1 = J^2 K^2 [(J + K)(n1^2 J + n2^2 K) - m~^2]

    with J = J'_m(U)/(U J_m(U)), K = K'_m(W)/(W K_m(W)), written without poles.
    """
    pt = point_from_beta(spec, m, omega, beta)
    return float(_d1(spec, m, pt.U, pt.W, pt.beta / pt.omega)[0])


def dispersion_D2(spec: FiberSpec, m: int, omega: float, beta: float) -> float:
    """Gauge/ghost determinant factor D2 = U W J_m K_m (U^2 J - W^2 K)."""
    pt = point_from_beta(spec, m, omega, beta)
    return float(_d2(spec, m, pt.U, pt.W, pt.beta / pt.omega)[0])


def dispersion_residual(spec: FiberSpec, family: Family, m: int, point: DispersionPoint) -> float:
    """|D| divided by the sum of magnitudes of its terms at point."""
    bo = point.beta / point.omega
    if family is Family.PHYSICAL:
        value, scale = _d1(spec, m, point.U, point.W, bo)
        if m == 0:
            # D1 = TE * TM; either factor may vanish
            te, te_s = _te_factor(spec, m, point.U, point.W, bo)
            tm, tm_s = _tm_factor(spec, m, point.U, point.W, bo)
            return float(min(abs(te) / te_s, abs(tm) / tm_s))
    else:
        value, scale = _d2(spec, m, point.U, point.W, bo)
    return float(abs(value) / scale)


# ---------------------------------------------------------------------------
# root finding


def _sign_change_brackets(f, lo: float, hi: float, n: int, depth: int = 3):
    """Brackets [a, b] with f(a) f(b) <= 0 from a uniform scan on [lo, hi].

    Local minima of |f| without a sign change are re-scanned on a finer grid
    so that closely spaced root pairs are not missed.
    """
    x = np.linspace(lo, hi, n + 1)
    y = f(x)
    sg = np.sign(y)
    brackets = []
    for i in range(n):
        if sg[i] == 0 or sg[i] * sg[i + 1] < 0:
            brackets.append((x[i], x[i + 1]))
    if depth > 0:
        a = np.abs(y)
        for i in range(1, n):
            if a[i] < a[i - 1] and a[i] < a[i + 1] and sg[i - 1] == sg[i] == sg[i + 1] != 0:
                brackets.extend(_sign_change_brackets(f, x[i - 1], x[i + 1], 64, depth - 1))
    return brackets


def _refine(f, brackets):
    roots = []
    for a, b in brackets:
        fa = float(f(np.array([a]))[0])
        if fa == 0.0:
            roots.append(a)
            continue
        roots.append(brentq(lambda s: float(f(np.array([s]))[0]), a, b, xtol=1e-15, maxiter=200))
    roots = sorted(set(roots), reverse=True)
    unique = []
    for r in roots:
        if not unique or abs(unique[-1] - r) > 1e-13:
            unique.append(r)
    return unique


def _scan_functions(spec: FiberSpec, family: Family, m: int):
    if family is Family.PHYSICAL and m == 0:
        return [_te_factor, _tm_factor]
    if family is Family.PHYSICAL:
        return [_d1]
    return [_d2]


def _roots_in_b(spec, family, m, uw_of_b):
    roots = []
    for fn in _scan_functions(spec, family, m):
        def f(b, fn=fn):
            U, W, bo = uw_of_b(b)
            return fn(spec, m, U, W, bo)[0]

        roots.extend(_refine(f, _sign_change_brackets(f, B_LO, B_HI, SCAN_INTERVALS)))
    return sorted(roots, reverse=True)


def solve_modes(spec: FiberSpec, omega: float, m: int, family: Family):
    """All guided roots of the family's dispersion relation at frequency omega.

    Returns a list of (ModeKey, DispersionPoint) with kappa = 1, 2, ... in
    order of descending guide index b.
    """
    family = Family(family)
    V = normalized_frequency(spec, omega)
    n1s, n2s = spec.n_core**2, spec.n_clad**2

    def uw(b):
        return V * np.sqrt(1.0 - b), V * np.sqrt(b), np.sqrt(b * n1s + (1.0 - b) * n2s)

    out = []
    for kappa, b in enumerate(_roots_in_b(spec, family, m, uw), start=1):
        pt = point_from_b(spec, m, omega, b)
        out.append((ModeKey(family, pt.beta, m, kappa), pt))
    return out


def solve_modes_at_beta(spec: FiberSpec, beta: float, m: int, family: Family):
    """All guided roots at fixed propagation constant beta (frequency varies)."""
    family = Family(family)
    if not beta > 0:
        raise DomainError("beta must be positive")
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    rho_na = spec.core_radius * spec.numerical_aperture

    def uw(b):
        nbar = np.sqrt(b * n1s + (1.0 - b) * n2s)
        V = rho_na * beta / nbar
        return V * np.sqrt(1.0 - b), V * np.sqrt(b), nbar

    out = []
    for kappa, b in enumerate(_roots_in_b(spec, family, m, uw), start=1):
        pt = point_at_fixed_beta(spec, m, beta, b)
        out.append((ModeKey(family, pt.beta, m, kappa), pt))
    return out


# ---------------------------------------------------------------------------
# interface system


def interface_matrices(spec: FiberSpec, m: int, omega: float, beta: float):
    """The 8x8 interface matrix M and the diagonal N as printed.

    M contains the logarithmic derivatives J, K and is singular where
    J_m(U) = 0; use interface_matrix for the pole-free product.
    """
    pt = point_from_beta(spec, m, omega, beta)
    U, W, rho, w, be = pt.U, pt.W, spec.core_radius, pt.omega, pt.beta
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    jm, jp, km, kp = _bessel_blocks(m, U, W)
    Jl = jp / (U * jm)
    Kl = kp / (W * km)
    Jp, Jn = Jl - m / U**2, Jl + m / U**2
    Kp, Kn = Kl - m / W**2, Kl + m / W**2
    s = SQRT2
    M = np.array(
        [
            [1, 0, 0, 0, -1, 0, 0, 0],
            [0, 1, 0, 0, 0, -1, 0, 0],
            [0, 0, -U * Jp, 0, 0, 0, W * Kp, 0],
            [0, 0, 0, U * Jn, 0, 0, 0, W * Kn],
            [-n1s * U**2 * Jl, 0, 1j * n1s * rho * w / s * U * Jp, -1j * n1s * rho * w / s * U * Jn,
             n2s * W**2 * Kl, 0, -1j * n2s * rho * w / s * W * Kp, -1j * n2s * rho * w / s * W * Kn],
            [0, 0, -1j * U / s, -1j * U / s, 0, 0, -1j * W / s, 1j * W / s],
            [0, U**2 * Jl, 1j * rho * be / s * U * Jp, -1j * rho * be / s * U * Jn,
             0, -W**2 * Kl, -1j * rho * be / s * W * Kp, -1j * rho * be / s * W * Kn],
            [1j * n1s * rho * w, 1j * be * rho, U / s, -U / s, -1j * n2s * rho * w, -1j * be * rho, W / s, W / s],
        ],
        dtype=complex,
    )
    N = np.diag([jm] * 4 + [km] * 4).astype(complex)
    return M, N


def interface_matrix(spec: FiberSpec, m: int, omega: float, beta: float) -> np.ndarray:
    """Pole-free product M.N acting on (q_core, q_clad) divided by (J_m(U), K_m(W))."""
    pt = point_from_beta(spec, m, omega, beta)
    U, W, rho, w, be = pt.U, pt.W, spec.core_radius, pt.omega, pt.beta
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    jm, jp, km, kp = _bessel_blocks(m, U, W)
    # U J_+ J_m = -J_{m+1}(U), U J_- J_m = J_{m-1}(U); same pattern for K with W
    jup, jdn = special.jv(m + 1, U), special.jv(m - 1, U)
    kup, kdn = special.kv(m + 1, W), special.kv(m - 1, W)
    s = SQRT2
    return np.array(
        [
            [jm, 0, 0, 0, -km, 0, 0, 0],
            [0, jm, 0, 0, 0, -km, 0, 0],
            [0, 0, jup, 0, 0, 0, -kup, 0],
            [0, 0, 0, jdn, 0, 0, 0, -kdn],
            [-n1s * U * jp, 0, -1j * n1s * rho * w / s * jup, -1j * n1s * rho * w / s * jdn,
             n2s * W * kp, 0, 1j * n2s * rho * w / s * kup, 1j * n2s * rho * w / s * kdn],
            [0, 0, -1j * U / s * jm, -1j * U / s * jm, 0, 0, -1j * W / s * km, 1j * W / s * km],
            [0, U * jp, -1j * rho * be / s * jup, -1j * rho * be / s * jdn,
             0, -W * kp, 1j * rho * be / s * kup, 1j * rho * be / s * kdn],
            [1j * n1s * rho * w * jm, 1j * be * rho * jm, U / s * jm, -U / s * jm,
             -1j * n2s * rho * w * km, -1j * be * rho * km, W / s * km, W / s * km],
        ],
        dtype=complex,
    )


def interface_vector(spec: FiberSpec, m: int, point: DispersionPoint, q: np.ndarray) -> np.ndarray:
    """Unknown vector of the interface system for a coefficient matrix q."""
    jm, _, km, _ = _bessel_blocks(m, point.U, point.W)
    return np.concatenate([q[0] / jm, q[1] / km])


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class ModeCoefficients:
    """Normalized coefficient matrices (rows core/cladding; columns t, par, +, -)."""

    q: np.ndarray
    p: np.ndarray
    norm_factor: float

    def __post_init__(self):
        for arr in (self.q, self.p):
            arr.setflags(write=False)


def _is_te(spec: FiberSpec, point: DispersionPoint) -> bool:
    bo = point.beta / point.omega
    te, te_s = _te_factor(spec, 0, point.U, point.W, bo)
    tm, tm_s = _tm_factor(spec, 0, point.U, point.W, bo)
    return abs(te) / te_s < abs(tm) / tm_s


def _log_derivs(m: int, point: DispersionPoint):
    jm, jp, km, kp = _bessel_blocks(m, point.U, point.W)
    return jp / (point.U * jm), kp / (point.W * km)


def physical_is_te(spec: FiberSpec, m: int, point: DispersionPoint) -> bool:
    """True for an m = 0 physical root of the transverse-electric branch."""
    return m == 0 and _is_te(spec, point)


def raw_coefficients(spec: FiberSpec, family: Family, m: int, point: DispersionPoint) -> np.ndarray:
    """Un-normalized q matrix of a mode (normalization factor set to one)."""
    rho, w, be, U, W = spec.core_radius, point.omega, point.beta, point.U, point.W
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    s = SQRT2
    family = Family(family)
    if family is Family.PHYSICAL:
        if physical_is_te(spec, m, point):
            # limit of the hybrid formula at J + K -> 0 with m~ -> 0
            c1 = 1j * rho * w / (s * U)
            c2 = 1j * rho * w / (s * W)
            return np.array([[0, 0, c1, c1], [0, 0, -c2, c2]], dtype=complex)
        Jl, Kl = _log_derivs(m, point)
        X = point.m_tilde * (be / w) / (Jl + Kl)
        return np.array(
            [
                [1, 0, -1j * rho * w / (s * U) * (n1s + X), 1j * rho * w / (s * U) * (n1s - X)],
                [1, 0, 1j * rho * w / (s * W) * (n2s + X), 1j * rho * w / (s * W) * (n2s - X)],
            ],
            dtype=complex,
        )
    if family is Family.GAUGE:
        return np.array(
            [
                [-1j * w, 1j * be, -U / (s * rho), U / (s * rho)],
                [-1j * w, 1j * be, -W / (s * rho), -W / (s * rho)],
            ],
            dtype=complex,
        )
    return np.array(
        [
            [1j * w, 1j * be, U / (s * rho), -U / (s * rho)],
            [1j * w, 1j * be, W / (s * rho), W / (s * rho)],
        ],
        dtype=complex,
    )


def raw_momentum(spec: FiberSpec, family: Family, m: int, point: DispersionPoint) -> np.ndarray:
    """Un-normalized p matrix as tabulated for each family."""
    rho, w, be, U, W = spec.core_radius, point.omega, point.beta, point.U, point.W
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    s = SQRT2
    family = Family(family)
    if family is Family.PHYSICAL:
        if physical_is_te(spec, m, point):
            return momentum_coefficients(spec, point, raw_coefficients(spec, family, m, point))
        Jl, Kl = _log_derivs(m, point)
        Y = point.m_tilde * (w / be) / (Jl + Kl)
        c1 = n1s * rho * be**2 / (s * U)
        c2 = n2s * rho * be**2 / (s * W)
        return np.array(
            [
                [0, 1j * n1s * be, -c1 * (1 + Y), c1 * (1 - Y)],
                [0, 1j * n2s * be, c2 * (1 + Y), c2 * (1 - Y)],
            ],
            dtype=complex,
        )
    if family is Family.GAUGE:
        return np.zeros((2, 4), dtype=complex)
    return np.array(
        [[-2 * n1s * be**2, 2 * n1s * be * w, 0, 0], [-2 * n2s * be**2, 2 * n2s * be * w, 0, 0]],
        dtype=complex,
    )


def momentum_coefficients(spec: FiberSpec, point: DispersionPoint, q: np.ndarray) -> np.ndarray:
    """Momentum matrix p implied by a potential matrix q (gauge-fixed equations)."""
    rho, w, be, U, W = spec.core_radius, point.omega, point.beta, point.U, point.W
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    s = SQRT2
    qb = np.conj(q)
    p = np.zeros((2, 4), dtype=complex)
    p[0, 0] = -1j * n1s * (n1s * w * qb[0, 0] + be * qb[0, 1]) + n1s * U / (s * rho) * (qb[0, 2] - qb[0, 3])
    p[0, 1] = 1j * n1s * (be * qb[0, 0] + w * qb[0, 1])
    p[0, 2] = n1s * (U / (s * rho) * qb[0, 0] + 1j * w * qb[0, 2])
    p[0, 3] = -n1s * (U / (s * rho) * qb[0, 0] - 1j * w * qb[0, 3])
    p[1, 0] = -1j * n2s * (n2s * w * qb[1, 0] + be * qb[1, 1]) - n2s * W / (s * rho) * (qb[1, 2] + qb[1, 3])
    p[1, 1] = 1j * n2s * (be * qb[1, 0] + w * qb[1, 1])
    p[1, 2] = n2s * (W / (s * rho) * qb[1, 0] + 1j * w * qb[1, 2])
    p[1, 3] = n2s * (W / (s * rho) * qb[1, 0] + 1j * w * qb[1, 3])
    return p


def gauge_function_coefficients(spec: FiberSpec, point: DispersionPoint, q: np.ndarray):
    """(q_chi, q'_chi): chi = q_chi J_m(U r/rho)/J_m(U) in the core, K-profile outside."""
    rho, w, be, U, W = spec.core_radius, point.omega, point.beta, point.U, point.W
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    s = SQRT2
    q_core = 1j * (n1s * w * q[0, 0] + be * q[0, 1]) + U / (s * rho) * (q[0, 2] - q[0, 3])
    q_clad = 1j * (n2s * w * q[1, 0] + be * q[1, 1]) - W / (s * rho) * (q[1, 2] + q[1, 3])
    return complex(q_core), complex(q_clad)


def _assemble(spec: FiberSpec, key: ModeKey, point: DispersionPoint):
    from .klein_gordon import norm_factor, normalization_I1, normalization_I2

    family = Family(key.family)
    residual = dispersion_residual(spec, family, key.m, point)
    if residual > 1e-8:
        raise SolverError(f"dispersion residual {residual:.2e} exceeds 1e-8 for {family.value} mode")
    if family is Family.PHYSICAL:
        integral = normalization_I1(spec, point, key.m)
    else:
        integral = normalization_I2(spec, point, key.m)
    N = norm_factor(spec, point, integral)
    q = raw_coefficients(spec, family, key.m, point) / N
    p = raw_momentum(spec, family, key.m, point) / N
    return ModeCoefficients(q, p, N), integral


def assemble_coefficients(spec: FiberSpec, key: ModeKey, point: DispersionPoint) -> ModeCoefficients:
    """Normalized q, p matrices and N (physical) or N' (gauge/ghost)."""
    return _assemble(spec, key, point)[0]


# ---------------------------------------------------------------------------
# radial profiles and fields


def _profiles(spec: FiberSpec, m: int, point: DispersionPoint, r: np.ndarray):
    """Profiles Z_nu(x r/rho)/Z_m(x) for nu = m, m, m+1, m-1 -> array (4, len(r)), core mask."""
    rho = spec.core_radius
    r = np.asarray(r, dtype=float)
    core = r < rho
    out = np.empty((4, r.size))
    jm = special.jv(m, point.U)
    km = special.kv(m, point.W)
    xc = point.U * r[core] / rho
    xo = point.W * r[~core] / rho
    for row, nu in enumerate((m, m, m + 1, m - 1)):
        out[row, core] = special.jv(nu, xc) / jm
        out[row, ~core] = special.kv(nu, xo) / km
    return out, core


@dataclass(frozen=True)
class RadialField:
    """Field components sampled on a radial grid (time and angle factors removed)."""

    grid: np.ndarray
    a: np.ndarray  # rows t, par, +, -
    pi: np.ndarray  # momentum coefficients, same layout
    chi: np.ndarray

    @property
    def a_t(self):
        return self.a[0]

    @property
    def a_par(self):
        return self.a[1]

    @property
    def a_plus(self):
        return self.a[2]

    @property
    def a_minus(self):
        return self.a[3]

    @property
    def pi_t(self):
        return self.pi[0]

    @property
    def pi_par(self):
        return self.pi[1]

    @property
    def pi_plus(self):
        return self.pi[2]

    @property
    def pi_minus(self):
        return self.pi[3]


def _expand(spec, m, point, matrix, r):
    prof, core = _profiles(spec, m, point, r)
    rowsel = np.where(core, 0, 1)
    return matrix[rowsel].T * prof


def _expand_scalar(spec, m, point, q_core, q_clad, r):
    prof, core = _profiles(spec, m, point, r)
    return np.where(core, q_core, q_clad) * prof[0]


def evaluate_field(spec: FiberSpec, coeffs: ModeCoefficients, key: ModeKey, point: DispersionPoint,
                   grid) -> RadialField:
    """Potential, momentum and gauge function of a mode on a radial grid."""
    r = np.asarray(grid, dtype=float)
    if r.ndim != 1 or np.any(r <= 0):
        raise DomainError("grid must be a 1-d array of positive radii")
    a = _expand(spec, key.m, point, coeffs.q, r)
    pi = _expand(spec, key.m, point, coeffs.p, r)
    qc, qo = gauge_function_coefficients(spec, point, coeffs.q)
    chi = _expand_scalar(spec, key.m, point, qc, qo, r)
    return RadialField(r, a, pi, chi)


@dataclass(frozen=True)
class ModeSolution:
    """A labelled, normalized mode of a fiber (optionally in a uniform potential phi)."""

    spec: FiberSpec
    key: ModeKey
    point: DispersionPoint
    coeffs: ModeCoefficients
    norm_integral: float
    potential: float = 0.0

    @property
    def family(self) -> Family:
        return self.key.family

    @property
    def omega(self) -> float:
        return self.point.omega

    @property
    def beta(self) -> float:
        return self.point.beta

    @property
    def m(self) -> int:
        return self.key.m

    @property
    def q(self) -> np.ndarray:
        return self.coeffs.q

    @property
    def p(self) -> np.ndarray:
        return self.coeffs.p

    @property
    def norm_factor(self) -> float:
        return self.coeffs.norm_factor

    def potential_components(self, r) -> np.ndarray:
        return _expand(self.spec, self.m, self.point, self.coeffs.q, np.atleast_1d(r))

    def momentum_components(self, r) -> np.ndarray:
        return _expand(self.spec, self.m, self.point, self.coeffs.p, np.atleast_1d(r))

    def gauge_function(self, r) -> np.ndarray:
        qc, qo = gauge_function_coefficients(self.spec, self.point, self.coeffs.q)
        return _expand_scalar(self.spec, self.m, self.point, qc, qo, np.atleast_1d(r))

    def field(self, grid) -> RadialField:
        return evaluate_field(self.spec, self.coeffs, self.key, self.point, grid)


def build_mode(spec: FiberSpec, key: ModeKey, point: DispersionPoint) -> ModeSolution:
    coeffs, integral = _assemble(spec, key, point)
    return ModeSolution(spec, key, point, coeffs, integral)


def solve(spec: FiberSpec, omega: float, m: int, family: Family) -> list:
    """Solved and normalized modes at frequency omega."""
    return [build_mode(spec, key, pt) for key, pt in solve_modes(spec, omega, m, family)]


def solve_at_beta(spec: FiberSpec, beta: float, m: int, family: Family) -> list:
    """Solved and normalized modes at propagation constant beta."""
    return [build_mode(spec, key, pt) for key, pt in solve_modes_at_beta(spec, beta, m, family)]


def mode_census(spec: FiberSpec, omega: float, m_max: int = MAX_AZIMUTHAL) -> dict:
    """Number of roots per (family, m) for m = 0..m_max (gauge and ghost share roots)."""
    counts = {}
    for family in (Family.PHYSICAL, Family.GAUGE):
        for m in range(m_max + 1):
            n = len(solve_modes(spec, omega, m, family))
            if n:
                counts[(family, m)] = n
                if family is Family.GAUGE:
                    counts[(Family.GHOST, m)] = n
    return counts
