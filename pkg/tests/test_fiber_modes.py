import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from gbfiber.errors import DomainError, SolverError
from gbfiber.fiber_modes import (
    REFERENCE_FIBER,
    Family,
    FiberSpec,
    ModeKey,
    assemble_coefficients,
    build_mode,
    dispersion_D1,
    dispersion_D2,
    dispersion_residual,
    interface_matrices,
    interface_matrix,
    interface_vector,
    mode_census,
    normalized_frequency,
    omega_from_v,
    omega_from_wavelength,
    point_from_b,
    point_from_beta,
    solve,
    solve_at_beta,
    solve_modes,
    solve_modes_at_beta,
)

V_1550 = 2.073620741896066  # frozen: rho omega sqrt(n1^2 - n2^2) at 1550 nm


def beta_of_b(spec, omega, b):
    return omega * np.sqrt(b * spec.n_core**2 + (1 - b) * spec.n_clad**2)


def sign_changes(values):
    s = np.sign(values)
    return int(np.sum(s[:-1] * s[1:] < 0))


# ---------------------------------------------------------------------------
# frequencies and dispersion points


def test_normalized_frequency_reference(spec, omega_1550):
    V = normalized_frequency(spec, omega_1550)
    assert V == pytest.approx(V_1550, rel=1e-14)
    assert V == pytest.approx(2.074, abs=5e-4)
    assert V < 2.4


def test_normalized_frequency_linear(spec):
    assert normalized_frequency(spec, 1e-9) == pytest.approx(1e-9 * spec.core_radius * spec.numerical_aperture)
    assert omega_from_v(spec, normalized_frequency(spec, 3.7)) == pytest.approx(3.7, rel=1e-15)


def test_frequency_domain_errors(spec):
    with pytest.raises(DomainError):
        normalized_frequency(FiberSpec(1.44, 1.45, 4.0), 1.0)
    with pytest.raises(DomainError):
        normalized_frequency(spec, 0.0)
    with pytest.raises(DomainError):
        omega_from_wavelength(-1.0)
    with pytest.raises(DomainError):
        FiberSpec(1.45, 0.0, 4.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5), st.floats(0.5, 12.0), st.floats(1e-6, 1 - 1e-6))
def test_dispersion_point_invariants(m, V, b):
    spec = REFERENCE_FIBER
    pt = point_from_b(spec, m, omega_from_v(spec, V), b)
    assert pt.U**2 + pt.W**2 == pytest.approx(pt.V**2, rel=1e-12)
    nbar2 = b * spec.n_core**2 + (1 - b) * spec.n_clad**2
    assert pt.effective_index**2 == pytest.approx(nbar2, rel=1e-14)
    back = point_from_beta(spec, m, pt.omega, pt.beta)
    assert back.b == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_point_domain(spec, omega_1550):
    with pytest.raises(DomainError):
        point_from_b(spec, 1, omega_1550, 1.0)
    with pytest.raises(DomainError):
        point_from_beta(spec, 1, omega_1550, 1.5 * omega_1550)
    with pytest.raises(DomainError):
        dispersion_D1(spec, 1, omega_1550, 1.4 * omega_1550)


# ---------------------------------------------------------------------------
# dispersion functions


def test_m_tilde_zero_for_m0(spec, omega_1550):
    assert point_from_b(spec, 0, omega_1550, 0.4).m_tilde == 0.0


def test_d1_single_root_scan(spec, omega_1550):
    # independent scan oracle over 2000 b values
    bs = np.linspace(1e-6, 1 - 1e-6, 2001)
    vals = [dispersion_D1(spec, 1, omega_1550, beta_of_b(spec, omega_1550, b)) for b in bs]
    assert sign_changes(vals) == 1


def test_d2_single_root_scan(spec, omega_1550):
    bs = np.linspace(1e-6, 1 - 1e-6, 2001)
    vals = [dispersion_D2(spec, 0, omega_1550, beta_of_b(spec, omega_1550, b)) for b in bs]
    assert sign_changes(vals) == 1
    ((_, pt),) = solve_modes(spec, omega_1550, 0, Family.GAUGE)
    # families have distinct dispersion: the gauge root is far from a physical root
    assert dispersion_residual(spec, Family.PHYSICAL, 0, pt) > 1e-2


@pytest.mark.parametrize("m", [0, 1, 2])
def test_dispersion_finite_across_j_zero(spec, m):
    # put U on the first zero of J_m and step across it
    j0 = special.jn_zeros(m, 1)[0] if m else 2.404825557695773
    V = j0 * 1.3
    omega = omega_from_v(spec, V)
    for U in np.linspace(j0 - 1e-3, j0 + 1e-3, 21):
        b = 1 - (U / V) ** 2
        beta = beta_of_b(spec, omega, b)
        for f in (dispersion_D1, dispersion_D2):
            assert np.isfinite(f(spec, m, omega, beta))


def test_d1_closed_form(spec):
    # compare the pole-free form with the printed form away from J_m zeros
    omega = omega_from_v(spec, 3.1)
    for m in (0, 1, 3):
        for b in (0.2, 0.5, 0.8):
            pt = point_from_b(spec, m, omega, b)
            jm, km = special.jv(m, pt.U), special.kv(m, pt.W)
            J = special.jvp(m, pt.U) / (pt.U * jm)
            K = special.kvp(m, pt.W) / (pt.W * km)
            n1s, n2s = spec.n_core**2, spec.n_clad**2
            d1 = jm**2 * km**2 * ((J + K) * (n1s * J + n2s * K) - pt.m_tilde**2)
            d2 = pt.U * pt.W * jm * km * (pt.U**2 * J - pt.W**2 * K)
            assert dispersion_D1(spec, m, omega, pt.beta) == pytest.approx(d1, rel=1e-10)
            assert dispersion_D2(spec, m, omega, pt.beta) == pytest.approx(d2, rel=1e-10)


# ---------------------------------------------------------------------------
# root finding


def test_solve_examples(spec, omega_1550):
    assert len(solve_modes(spec, omega_1550, 1, Family.PHYSICAL)) == 1
    assert len(solve_modes(spec, omega_1550, 0, Family.GAUGE)) == 1
    assert len(solve_modes(spec, omega_1550, 0, Family.GHOST)) == 1
    assert solve_modes(spec, omega_1550, 0, Family.PHYSICAL) == []
    # m = 3 hybrid modes are cut off near the first zero of J_1 (3.83); m = 2 near 2.405
    assert solve_modes(spec, omega_from_v(spec, 3.5), 3, Family.PHYSICAL) == []
    assert len(solve_modes(spec, omega_from_v(spec, 3.9), 3, Family.PHYSICAL)) == 1
    assert solve_modes(spec, omega_from_v(spec, 2.3), 2, Family.PHYSICAL) == []
    assert len(solve_modes(spec, omega_from_v(spec, 2.5), 2, Family.PHYSICAL)) == 1


def test_census(spec, omega_1550):
    assert mode_census(spec, omega_1550) == {
        (Family.PHYSICAL, 1): 1, (Family.GAUGE, 0): 1, (Family.GHOST, 0): 1,
    }


@pytest.mark.parametrize("V", [1.0, 2.5, 4.0, 7.3, 11.5])
def test_roots_residual_and_order(spec, V):
    omega = omega_from_v(spec, V)
    for family in (Family.PHYSICAL, Family.GAUGE):
        for m in range(6):
            roots = solve_modes(spec, omega, m, family)
            bs = [pt.b for _, pt in roots]
            assert bs == sorted(bs, reverse=True)
            assert [k.kappa for k, _ in roots] == list(range(1, len(roots) + 1))
            for key, pt in roots:
                assert key.family is family and key.m == m and key.beta == pt.beta
                assert dispersion_residual(spec, family, m, pt) <= 1e-10


def test_m0_physical_splits_te_tm(spec):
    # at V = 3 both TE01 and TM01 exist and lie within one scan interval
    roots = solve_modes(spec, omega_from_v(spec, 3.0), 0, Family.PHYSICAL)
    assert len(roots) == 2
    assert 0 < roots[0][1].b - roots[1][1].b < 5e-3


def test_mode_count_monotone(spec):
    for m in (0, 1, 2):
        n2 = len(solve_modes(spec, omega_from_v(spec, 2.0), m, Family.PHYSICAL))
        n5 = len(solve_modes(spec, omega_from_v(spec, 5.0), m, Family.PHYSICAL))
        assert n5 >= n2


def test_branches_monotone_in_v(spec):
    grid = np.linspace(0.5, 12.0, 50)
    for family in (Family.PHYSICAL, Family.GAUGE):
        for m in range(4):
            branches = {}
            for V in grid:
                for key, pt in solve_modes(spec, omega_from_v(spec, V), m, family):
                    branches.setdefault(key.kappa, []).append(pt.b)
            for bs in branches.values():
                assert np.all(np.diff(bs) > 0)


def test_solve_at_beta_consistent(spec):
    omega = omega_from_v(spec, 4.2)
    for family in (Family.PHYSICAL, Family.GAUGE):
        for key, pt in solve_modes(spec, omega, 1, family):
            hits = [p for _, p in solve_modes_at_beta(spec, pt.beta, 1, family) if abs(p.omega - omega) < 1e-9]
            assert len(hits) == 1
            assert hits[0].b == pytest.approx(pt.b, rel=1e-9)


# ---------------------------------------------------------------------------
# interface system


def test_interface_matrix_pole_free_equals_product(spec):
    omega = omega_from_v(spec, 5.0)
    for m in range(4):
        for b in (0.1, 0.45, 0.9):
            beta = point_from_b(spec, m, omega, b).beta
            M, N = interface_matrices(spec, m, omega, beta)
            np.testing.assert_allclose(interface_matrix(spec, m, omega, beta), M @ N, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("V", [2.074, 4.0, 6.5])
def test_null_space_at_roots(spec, V):
    omega = omega_from_v(spec, V)
    for family in Family:
        for m in range(3):
            for key, pt in solve_modes(spec, omega, m, family):
                MN = interface_matrix(spec, m, omega, pt.beta)
                s = np.linalg.svd(MN, compute_uv=False)
                assert s[-1] <= 1e-9 * s[0]
                mode = build_mode(spec, key, pt)
                v = interface_vector(spec, m, pt, mode.q)
                assert np.linalg.norm(MN @ v) <= 1e-8 * np.linalg.norm(MN, 2) * np.linalg.norm(v)


# ---------------------------------------------------------------------------
# coefficients and fields


def test_coefficient_zero_patterns(spec, fundamental, gauge_pair_1550):
    assert np.all(fundamental.q[:, 1] == 0)
    assert np.all(fundamental.p[:, 0] == 0)
    gauge, ghost = gauge_pair_1550
    assert np.all(gauge.p == 0)
    assert np.any(ghost.p != 0)


def test_phase_convention(spec):
    omega = omega_from_v(spec, 5.0)
    for m in range(3):
        for mode in solve(spec, omega, m, Family.PHYSICAL):
            q = mode.q[0]
            if q[0] != 0:
                assert q[0].imag == 0 and q[0].real > 0
            else:
                assert q[2].imag > 0


def test_coefficients_are_read_only(fundamental):
    with pytest.raises(ValueError):
        fundamental.q[0, 0] = 0


def test_assemble_rejects_off_shell_point(spec, omega_1550):
    pt = point_from_b(spec, 1, omega_1550, 0.3)
    with pytest.raises(SolverError):
        assemble_coefficients(spec, ModeKey(Family.PHYSICAL, pt.beta, 1, 1), pt)


def test_assemble_matches_build(spec, fundamental):
    c = assemble_coefficients(spec, fundamental.key, fundamental.point)
    np.testing.assert_array_equal(c.q, fundamental.q)
    assert c.norm_factor == fundamental.norm_factor > 0


def _grid(spec):
    return np.linspace(spec.core_radius / 300, 6 * spec.core_radius, 500)


@pytest.mark.parametrize("V", [2.074, 3.0, 5.5])
def test_gauge_condition(spec, V):
    omega = omega_from_v(spec, V)
    r = _grid(spec)
    for m in range(3):
        for mode in solve(spec, omega, m, Family.PHYSICAL):
            f = mode.field(r)
            assert np.max(np.abs(f.chi)) <= 1e-8 * np.max(np.abs(f.a))
        for mode in solve(spec, omega, m, Family.GHOST):
            f = mode.field(r)
            expected = 2j * mode.beta**2 / mode.omega * f.a_t
            assert np.max(np.abs(f.chi - expected)) <= 1e-8 * np.max(np.abs(expected))
        for mode in solve(spec, omega, m, Family.GAUGE):
            f = mode.field(r)
            assert np.max(np.abs(f.chi)) <= 1e-8 * np.max(np.abs(f.a))


def test_gauge_mode_is_gradient(spec):
    """A_gauge = d(lambda), lambda = f0(r) e^{i(beta z + m theta - omega t)}, checked with mpmath derivatives."""
    mp.mp.dps = 30
    omega = omega_from_v(spec, 4.0)
    rho = spec.core_radius
    for m in (0, 1, 2):
        for mode in solve(spec, omega, m, Family.GAUGE):
            pt, N = mode.point, mode.norm_factor
            jm, km = mp.besselj(m, pt.U), mp.besselk(m, pt.W)

            def f0(r):
                if r < rho:
                    return mp.besselj(m, pt.U * r / rho) / jm / N
                return mp.besselk(m, pt.W * r / rho) / km / N

            r = np.concatenate([np.linspace(0.2, 0.95, 6), np.linspace(1.05, 3.0, 6)]) * rho
            a = mode.potential_components(r)
            lam = np.array([float(f0(x)) for x in r])
            dlam = np.array([float(mp.diff(f0, x)) for x in r])
            expected = np.array([
                -1j * mode.omega * lam,
                1j * mode.beta * lam,
                (dlam - m * lam / r) / np.sqrt(2),
                (dlam + m * lam / r) / np.sqrt(2),
            ])
            assert np.max(np.abs(a - expected)) <= 1e-8 * np.max(np.abs(expected))


@pytest.mark.parametrize("V", [2.074, 3.0, 6.0])
def test_continuity_at_interface(spec, V):
    omega = omega_from_v(spec, V)
    rho = spec.core_radius
    r = np.array([rho * (1 - 1e-15), rho])
    for family in Family:
        for m in range(3):
            for mode in solve(spec, omega, m, family):
                a = mode.potential_components(r)
                scale = np.max(np.abs(mode.field(_grid(spec)).a), axis=1)
                jump = np.abs(a[:, 0] - a[:, 1])
                assert np.all(jump <= 1e-8 * np.maximum(scale, 1e-300))


def test_field_grid_validation(spec, fundamental):
    with pytest.raises(DomainError):
        fundamental.field(np.array([0.0, 1.0]))
    f = fundamental.field(np.array([1.0, 2.0]))
    assert f.a_t.shape == f.pi_minus.shape == f.chi.shape == (2,)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.6, 10.0), st.integers(0, 4))
def test_solved_modes_property(V, m):
    spec = REFERENCE_FIBER
    omega = omega_from_v(spec, V)
    r = _grid(spec)
    for family in Family:
        for mode in solve(spec, omega, m, family):
            assert dispersion_residual(spec, family, m, mode.point) <= 1e-10
            assert mode.norm_factor > 0 and mode.norm_integral > 0
            if family is Family.PHYSICAL:
                f = mode.field(r)
                assert np.max(np.abs(f.chi)) <= 1e-8 * np.max(np.abs(f.a))


def test_solve_at_beta_modes(shared_beta_modes):
    assert {md.family for md in shared_beta_modes} == set(Family)
    beta = shared_beta_modes[0].beta
    assert all(md.beta == pytest.approx(beta, rel=1e-14) for md in shared_beta_modes)
    assert solve_at_beta(REFERENCE_FIBER, beta, 1, Family.PHYSICAL)[0].omega == shared_beta_modes[0].omega
