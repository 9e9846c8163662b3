"""Klein-Gordon products of fiber modes and their normalization integrals.

Products are reported as the coefficient of delta_{mm'} delta(beta - beta'),
i.e. with the (2 pi)^2 from the z and theta integrals and the factor (1 + phi)
of a uniform potential included:

    bulk      = (2pi)^2 (1+phi) (w + w') int_0^inf r n^2 g(a*, a') dr
    interface = (2pi)^2 (1+phi) i rho [[ n^2 (a*_t a'_r - a'_t a*_r) ]]

where g(a*, a') = -n^2 a*_t a'_t + a*_par a'_par + a*_+ a'_+ + a*_- a'_-,
a_r = (a_+ + a_-)/sqrt(2) and [[f]] = f(rho-) - f(rho+).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.integrate import quad_vec

from .errors import IntegrityError, QuadratureError
from .fiber_modes import (
    DispersionPoint,
    Family,
    FiberSpec,
    ModeSolution,
    SQRT2,
    _log_derivs,
    physical_is_te,
)
from .specfun import radial_j_square_integral, radial_k_square_integral

TAIL_RATIO = 1e-18
EPSREL = 1e-12


@dataclass(frozen=True)
class ReducedProduct:
    bulk: complex
    interface: complex

    @property
    def total(self) -> complex:
        return self.bulk + self.interface


@dataclass(frozen=True)
class Conjugate:
    """Complex conjugate A* of a positive-frequency mode A."""

    mode: ModeSolution


def conjugate(mode):
    """A -> A*, and A* -> A."""
    if isinstance(mode, Conjugate):
        return mode.mode
    return Conjugate(mode)


class _View:
    """Frame components and labels of a mode or of its conjugate."""

    def __init__(self, mode):
        self.conj = isinstance(mode, Conjugate)
        base = mode.mode if self.conj else mode
        self.base = base
        self.spec = base.spec
        sign = -1 if self.conj else 1
        self.omega = sign * base.omega
        self.beta = sign * base.beta
        self.m = sign * base.m
        self.potential = base.potential

    def components(self, r, region):
        """(4, n) frame components at radii r evaluated with the core or cladding profile."""
        base = self.base
        m, pt, rho = base.m, base.point, self.spec.core_radius
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if region == "core":
            x, row, fn, norm = pt.U, 0, special.jv, special.jv(m, pt.U)
        else:
            x, row, fn, norm = pt.W, 1, special.kv, special.kv(m, pt.W)
        orders = (m, m, m + 1, m - 1)
        prof = np.array([fn(nu, x * r / rho) for nu in orders]) / norm
        a = base.q[row][:, None] * prof
        if self.conj:
            # conj(e^+) = e^-: swap the +/- components
            a = np.conj(a[[0, 1, 3, 2]])
        return a


def _bilinear(x, y, n2):
    return -n2 * np.conj(x[0]) * y[0] + np.conj(x[1]) * y[1] + np.conj(x[2]) * y[2] + np.conj(x[3]) * y[3]


def _bilinear_abs(x, y, n2):
    ax, ay = np.abs(x), np.abs(y)
    return n2 * ax[0] * ay[0] + ax[1] * ay[1] + ax[2] * ay[2] + ax[3] * ay[3]


def cladding_cutoff(spec: FiberSpec, W: float, m: int) -> float:
    """Radius beyond which every cladding profile squared is below TAIL_RATIO of its value at rho."""
    rho = spec.core_radius
    orders = (m, m + 1, m - 1)
    ref = np.array([special.kv(nu, W) for nu in orders])
    r = rho * (1.0 + 1.0 / W)
    while True:
        val = np.array([special.kv(nu, W * r / rho) for nu in orders])
        if np.all((val / ref) ** 2 < TAIL_RATIO):
            return r
        r = rho + 1.5 * (r - rho)


def _integrate(f, a, b, what):
    """Adaptive Gauss-Kronrod integral on [a, b] of f(r) = (Re g, Im g, |g|_terms).

    The third component integrates the sum of magnitudes of the terms of g;
    it sets the absolute scale, so cancelling integrals of orthogonal modes
    are resolved to EPSREL of that scale instead of to their own tiny size.
    """
    xs, ws = np.polynomial.legendre.leggauss(64)
    xm = 0.5 * (b - a) * xs + 0.5 * (b + a)
    scale = 0.5 * (b - a) * sum(w * f(x)[2] for w, x in zip(ws, xm))
    if scale == 0.0:
        # identically vanishing integrand (e.g. gauge-mode momenta)
        return 0j
    res, err, info = quad_vec(f, a, b, epsabs=EPSREL * scale, epsrel=EPSREL, norm="max",
                              limit=2000, full_output=True)
    if not info.success:
        # status 2: roundoff limits the estimate; accept it when the error is still tiny
        if not (info.status == 2 and err <= 1e-10 * max(scale, float(res[2]))):
            raise QuadratureError(f"{what} quadrature did not converge", float(err))
    return complex(res[0], res[1])


def _check_pair(x: _View, y: _View):
    if x.spec != y.spec or x.potential != y.potential:
        raise ValueError("products are defined between modes of the same fiber and potential")


def _labels_match(x: _View, y: _View) -> bool:
    if x.m != y.m:
        return False
    return abs(x.beta - y.beta) <= 1e-12 * max(abs(x.beta), abs(y.beta))


def reduced_kg_product(mode_a, mode_b, t: float = 0.0) -> ReducedProduct:
    """Reduced KG product <A|A'> split into bulk and interface parts.

    Arguments are ModeSolution objects or Conjugate wrappers of them. Pairs
    with different (beta, m) labels give zero through the delta prefactors.
    """
    x, y = _View(mode_a), _View(mode_b)
    _check_pair(x, y)
    if not _labels_match(x, y):
        return ReducedProduct(0j, 0j)
    spec = x.spec
    rho = spec.core_radius
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    prefactor = (2 * np.pi) ** 2 * (1.0 + x.potential) * np.exp(1j * (x.omega - y.omega) * t)
    wsum = x.omega + y.omega

    def integrand(region, n2):
        def f(r):
            cx, cy = x.components(r, region), y.components(r, region)
            v = wsum * r * n2 * _bilinear(cx, cy, n2)[0]
            mag = abs(wsum) * r * n2 * _bilinear_abs(cx, cy, n2)[0]
            return np.array([v.real, v.imag, mag])

        return f

    r_max = max(cladding_cutoff(spec, v.base.point.W, v.base.m) for v in (x, y))
    bulk = _integrate(integrand("core", n1s), 0.0, rho, "core")
    bulk += _integrate(integrand("clad", n2s), rho, r_max, "cladding")

    def side(region, n2):
        a = x.components(rho, region)[:, 0]
        b = y.components(rho, region)[:, 0]
        a_r = (a[2] + a[3]) / SQRT2
        b_r = (b[2] + b[3]) / SQRT2
        return n2 * (np.conj(a[0]) * b_r - b[0] * np.conj(a_r))

    interface = 1j * rho * (side("core", n1s) - side("clad", n2s))
    return ReducedProduct(complex(prefactor * bulk), complex(prefactor * interface))


def kg_product_momentum_form(mode_a: ModeSolution, mode_b: ModeSolution, t: float = 0.0) -> complex:
    """Reduced KG product from potentials and momenta, i int (A*.Pi' - A'.Pi*).

    Independent of the bulk/interface rewriting; positive-frequency modes only.
    """
    x, y = _View(mode_a), _View(mode_b)
    _check_pair(x, y)
    if x.conj or y.conj:
        raise ValueError("momentum form implemented for positive-frequency modes")
    if not _labels_match(x, y):
        return 0j
    spec = x.spec
    rho = spec.core_radius
    prefactor = (2 * np.pi) ** 2 * (1.0 + x.potential) * np.exp(1j * (x.omega - y.omega) * t)

    def f(r):
        a = mode_a.potential_components(r)[:, 0]
        pa = mode_a.momentum_components(r)[:, 0]
        b = mode_b.potential_components(r)[:, 0]
        pb = mode_b.momentum_components(r)[:, 0]
        v = 1j * r * (np.conj(np.sum(a * pb)) - np.sum(b * pa))
        mag = r * (np.sum(np.abs(a * pb)) + np.sum(np.abs(b * pa)))
        return np.array([v.real, v.imag, mag])

    r_max = max(cladding_cutoff(spec, v.base.point.W, v.base.m) for v in (x, y))
    # the profile selector uses r < rho for the core, so stop just short of rho
    total = _integrate(f, 0.0, rho * (1 - 1e-15), "core") + _integrate(f, rho, r_max, "cladding")
    return complex(prefactor * total)


# ---------------------------------------------------------------------------
# normalization


def norm_factor(spec: FiberSpec, point: DispersionPoint, integral: float) -> float:
    """N = 2 pi rho beta sqrt(2 omega I)."""
    return float(2 * np.pi * spec.core_radius * point.beta * np.sqrt(2 * point.omega * integral))


def _jk_integrals(spec: FiberSpec, point: DispersionPoint, m: int):
    rho = spec.core_radius
    jm2 = special.jv(m, point.U) ** 2
    km2 = special.kv(m, point.W) ** 2

    def jint(nu):
        return radial_j_square_integral(nu, point.U, rho) / jm2

    def kint(nu):
        return radial_k_square_integral(nu, point.W, rho) / km2

    return jint, kint


def normalization_I1(spec: FiberSpec, point: DispersionPoint, m: int) -> float:
    """I1 of a physical mode from the closed-form radial integrals."""
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    U, W, w, be = point.U, point.W, point.omega, point.beta
    jint, kint = _jk_integrals(spec, point, m)
    if physical_is_te(spec, m, point):
        value = (w / be) ** 2 * (
            n1s / (2 * U**2) * (jint(m + 1) + jint(m - 1)) + n2s / (2 * W**2) * (kint(m + 1) + kint(m - 1))
        )
    else:
        Jl, Kl = _log_derivs(m, point)
        X = point.m_tilde * (be / w) / (Jl + Kl)
        Y = point.m_tilde * (w / be) / (Jl + Kl)
        value = n1s / (2 * U**2) * (
            (1 + Y) * (n1s + X) * jint(m + 1) + (1 - Y) * (n1s - X) * jint(m - 1)
        ) + n2s / (2 * W**2) * ((1 + Y) * (n2s + X) * kint(m + 1) + (1 - Y) * (n2s - X) * kint(m - 1))
    if not value > 0:
        raise IntegrityError(f"I1 = {value!r} is not positive")
    return float(value)


def normalization_I2(spec: FiberSpec, point: DispersionPoint, m: int) -> float:
    """I2 of a gauge/ghost pair in closed form."""
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    U, W = point.U, point.W
    Jl, Kl = _log_derivs(m, point)
    value = (
        n1s * U**2 * Jl**2
        + n2s * W**2 * Kl**2
        + (n1s - n2s) * (1 - m**2 * spec.core_radius**2 * point.beta**2 / (U**2 * W**2))
    )
    if not value > 0:
        raise IntegrityError(f"I2 = {value!r} is not positive")
    return float(value)


def normalization_I2_integral(spec: FiberSpec, point: DispersionPoint, m: int) -> float:
    """I2 from its defining integrals (closed-form radial integrals of J_m^2, K_m^2)."""
    rho = spec.core_radius
    jint, kint = _jk_integrals(spec, point, m)
    return float(2 * spec.n_core**2 / rho**2 * jint(m) + 2 * spec.n_clad**2 / rho**2 * kint(m))


# ---------------------------------------------------------------------------
# orthogonality


@dataclass(frozen=True)
class OrthogonalityReport:
    products: np.ndarray  # totals at t = 0
    products_shifted: np.ndarray  # totals at t = 1/omega of the row mode
    max_offdiagonal: float
    max_time_change: float


def orthogonality_report(modes) -> OrthogonalityReport:
    """Pairwise reduced products of modes sharing (beta, m), evaluated at two times."""
    modes = list(modes)
    n = len(modes)
    ref = modes[0]
    for md in modes[1:]:
        if md.m != ref.m or abs(md.beta - ref.beta) > 1e-12 * ref.beta:
            raise ValueError("orthogonality report needs modes sharing (beta, m)")
    p0 = np.zeros((n, n), dtype=complex)
    p1 = np.zeros((n, n), dtype=complex)
    for i, a in enumerate(modes):
        for j, b in enumerate(modes):
            p0[i, j] = reduced_kg_product(a, b, 0.0).total
            p1[i, j] = reduced_kg_product(a, b, 1.0 / a.omega).total
    off = [abs(p0[i, j]) for i in range(n) for j in range(n) if modes[i].omega != modes[j].omega]
    return OrthogonalityReport(p0, p1, max(off, default=0.0), float(np.max(np.abs(p1 - p0))))


def quadrature_norm_integral(mode: ModeSolution, partner: ModeSolution | None = None) -> float:
    """I1 (or I2) recovered from the quadrature KG product instead of the closed form.

    A mode normalized with the closed-form I has product I_closed / I_true with
    itself (physical) or with its ghost/gauge partner, so I_true = I_closed * product.
    """
    if mode.family is Family.PHYSICAL:
        other = mode
    else:
        if partner is None or partner.family is mode.family:
            raise ValueError("gauge and ghost integrals need the partner mode of the other family")
        other = partner
    prod = reduced_kg_product(mode, other).total
    return float(mode.norm_integral * prod.real)
