import numpy as np
import pytest
from scipy import special
from scipy.integrate import quad

from gbfiber.errors import QuadratureError
from gbfiber.fiber_modes import Family, omega_from_v, solve, solve_at_beta
from gbfiber.gravity import apply_uniform_potential
from gbfiber.klein_gordon import (
    _integrate,
    cladding_cutoff,
    conjugate,
    kg_product_momentum_form,
    norm_factor,
    normalization_I1,
    normalization_I2,
    normalization_I2_integral,
    orthogonality_report,
    quadrature_norm_integral,
    reduced_kg_product,
)


def test_physical_self_product(fundamental):
    p = reduced_kg_product(fundamental, fundamental)
    assert p.total == p.bulk + p.interface
    assert abs(p.total - 1) <= 1e-6
    assert abs(kg_product_momentum_form(fundamental, fundamental) - 1) <= 1e-6


def test_gauge_ghost_products(gauge_pair_1550):
    gauge, ghost = gauge_pair_1550
    assert abs(reduced_kg_product(gauge, gauge).total) <= 1e-8
    assert abs(reduced_kg_product(ghost, ghost).total) <= 1e-8
    assert abs(reduced_kg_product(ghost, gauge).total - 1) <= 1e-6
    assert abs(reduced_kg_product(gauge, ghost).total - 1) <= 1e-6


def test_two_routes_agree(shared_beta_modes):
    # bulk + interface rewriting versus the potential/momentum form
    for i, a in enumerate(shared_beta_modes):
        for b in shared_beta_modes[i:]:
            split = reduced_kg_product(a, b).total
            direct = kg_product_momentum_form(a, b)
            assert abs(split - direct) <= 1e-8


def test_conjugate_relations(shared_beta_modes):
    for a in shared_beta_modes:
        for b in shared_beta_modes:
            ab = reduced_kg_product(a, b).total
            cc = reduced_kg_product(conjugate(a), conjugate(b)).total
            assert abs(cc + np.conj(ab)) <= 1e-8
            assert reduced_kg_product(a, conjugate(b)).total == 0
    assert conjugate(conjugate(shared_beta_modes[0])) is shared_beta_modes[0]


def test_conjugate_self_product_is_negative(fundamental):
    assert abs(reduced_kg_product(conjugate(fundamental), conjugate(fundamental)).total + 1) <= 1e-6


def test_mismatched_labels_vanish(spec):
    omega = omega_from_v(spec, 4.0)
    a = solve(spec, omega, 1, Family.PHYSICAL)[0]
    b = solve(spec, omega, 0, Family.PHYSICAL)[0]
    c = solve(spec, omega_from_v(spec, 4.1), 1, Family.PHYSICAL)[0]
    assert reduced_kg_product(a, b).total == 0
    assert reduced_kg_product(a, c).total == 0
    assert kg_product_momentum_form(a, c) == 0


def test_product_requires_same_fiber(fundamental):
    shifted = apply_uniform_potential(fundamental, 1e-5)
    with pytest.raises(ValueError):
        reduced_kg_product(fundamental, shifted)
    with pytest.raises(ValueError):
        kg_product_momentum_form(conjugate(fundamental), fundamental)


def test_orthogonality_examples(shared_beta_modes):
    phys = [md for md in shared_beta_modes if md.family is Family.PHYSICAL]
    ghost = [md for md in shared_beta_modes if md.family is Family.GHOST]
    assert len(phys) >= 2
    assert abs(reduced_kg_product(phys[0], phys[1]).total) <= 1e-6
    assert abs(reduced_kg_product(phys[0], ghost[0]).total) <= 1e-6
    assert abs(reduced_kg_product(phys[1], phys[1]).total - 1) <= 1e-6


def test_orthogonality_report(shared_beta_modes):
    rep = orthogonality_report(shared_beta_modes)
    assert rep.max_offdiagonal <= 1e-6
    assert rep.max_time_change <= 1e-10
    n = len(shared_beta_modes)
    assert rep.products.shape == (n, n)
    # delta identity: (w^2 - w'^2) <A|A'> = 0
    for i, a in enumerate(shared_beta_modes):
        for j, b in enumerate(shared_beta_modes):
            dw = a.omega**2 - b.omega**2
            assert abs(dw * rep.products[i, j]) <= 1e-6 * abs(dw) + 1e-15


def test_orthogonality_report_rejects_mixed(spec):
    omega = omega_from_v(spec, 4.0)
    modes = solve(spec, omega, 1, Family.PHYSICAL) + solve(spec, omega, 0, Family.PHYSICAL)
    with pytest.raises(ValueError):
        orthogonality_report(modes)


# ---------------------------------------------------------------------------
# normalization integrals


def test_i1_against_quadrature(spec, fundamental):
    assert quadrature_norm_integral(fundamental) == pytest.approx(fundamental.norm_integral, rel=1e-8)


def test_norm_factor_formula(spec, fundamental):
    pt = fundamental.point
    expected = 2 * np.pi * spec.core_radius * pt.beta * np.sqrt(2 * pt.omega * fundamental.norm_integral)
    assert norm_factor(spec, pt, fundamental.norm_integral) == pytest.approx(expected, rel=1e-15)
    assert fundamental.norm_factor == pytest.approx(expected, rel=1e-15)


def test_i1_positive_in_diagram_window(spec):
    for V in np.linspace(0.5, 12.0, 12):
        omega = omega_from_v(spec, V)
        for m in range(6):
            for mode in solve(spec, omega, m, Family.PHYSICAL):
                assert normalization_I1(spec, mode.point, m) > 0


def test_i1_te_branch(spec):
    modes = solve(spec, omega_from_v(spec, 3.0), 0, Family.PHYSICAL)
    assert len(modes) == 2
    for mode in modes:
        assert quadrature_norm_integral(mode) == pytest.approx(mode.norm_integral, rel=1e-8)


def test_i2_closed_vs_integral(spec, gauge_pair_1550):
    gauge, ghost = gauge_pair_1550
    pt = gauge.point
    closed = normalization_I2(spec, pt, 0)
    assert normalization_I2_integral(spec, pt, 0) == pytest.approx(closed, rel=1e-8)
    assert quadrature_norm_integral(gauge, ghost) == pytest.approx(closed, rel=1e-8)
    with pytest.raises(ValueError):
        quadrature_norm_integral(gauge)


def test_i2_integral_by_quadrature(spec):
    """Independent oracle: I2 = 2/rho^2 [n1^2 int r f0^2 + n2^2 int r f0^2] by scipy.quad."""
    rho = spec.core_radius
    for V, m in ((2.074, 0), (4.0, 1), (6.0, 2)):
        for mode in solve(spec, omega_from_v(spec, V), m, Family.GAUGE):
            U, W = mode.point.U, mode.point.W
            core = quad(lambda r: r * (special.jv(m, U * r / rho) / special.jv(m, U)) ** 2, 0, rho, epsrel=1e-13)[0]
            clad = quad(lambda r: r * (special.kv(m, W * r / rho) / special.kv(m, W)) ** 2, rho, np.inf,
                        epsrel=1e-13)[0]
            oracle = 2 / rho**2 * (spec.n_core**2 * core + spec.n_clad**2 * clad)
            assert mode.norm_integral == pytest.approx(oracle, rel=1e-8)


def test_i2_m0_reduction(spec, gauge_pair_1550):
    pt = gauge_pair_1550[0].point
    J = special.jvp(0, pt.U) / (pt.U * special.jv(0, pt.U))
    K = special.kvp(0, pt.W) / (pt.W * special.kv(0, pt.W))
    n1s, n2s = spec.n_core**2, spec.n_clad**2
    expected = n1s * pt.U**2 * J**2 + n2s * pt.W**2 * K**2 + (n1s - n2s)
    assert normalization_I2(spec, pt, 0) == pytest.approx(expected, rel=1e-14)


def test_i2_positive(spec):
    for V in np.linspace(1.0, 12.0, 8):
        for m in range(6):
            for mode in solve(spec, omega_from_v(spec, V), m, Family.GAUGE):
                assert mode.norm_integral > 0


# ---------------------------------------------------------------------------
# quadrature plumbing


def test_cladding_cutoff(spec, fundamental):
    W, m, rho = fundamental.point.W, 1, spec.core_radius
    r = cladding_cutoff(spec, W, m)
    for nu in (m - 1, m, m + 1):
        assert (special.kv(nu, W * r / rho) / special.kv(nu, W)) ** 2 < 1e-18


def test_quadrature_failure_reports_tolerance():
    with pytest.raises(QuadratureError) as exc:
        _integrate(lambda x: np.array([np.sin(1e9 * x) * np.exp(x), 0.0, np.exp(x)]), 0.0, 1.0, "oscillatory")
    assert exc.value.achieved > 0


def test_potential_rescaled_norm(fundamental):
    for phi in (-1e-4, 3e-5, 1e-4):
        md = apply_uniform_potential(fundamental, phi)
        assert abs(reduced_kg_product(md, md).total - 1) <= 1e-6


def test_fixed_beta_gram(spec):
    beta = solve(spec, omega_from_v(spec, 5.0), 1, Family.PHYSICAL)[0].beta
    trio = [solve_at_beta(spec, beta, 1, f)[0] for f in Family]
    gram = np.array([[reduced_kg_product(a, b).total for b in trio] for a in trio])
    np.testing.assert_allclose(gram, [[1, 0, 0], [0, 0, 1], [0, 1, 0]], atol=1e-6)
