"""Weak homogeneous gravity: PPN reduction, uniform-potential modes, redshift.

Accelerations are stored pre-divided by c^2 (units 1/um), so every formula
here is in geometric units with lengths in um.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SolverError
from .fiber_modes import ModeCoefficients, ModeSolution, build_mode, solve_modes
from .quantum_states import BinnedWavefunction

C_LIGHT = 299_792_458.0  # m/s, exact
UM_PER_M = 1e6
MAX_POTENTIAL = 1e-3


def acceleration_to_geometric(g_si: float) -> float:
    """g in m/s^2 -> g/c^2 in 1/um."""
    return g_si / C_LIGHT**2 / UM_PER_M


@dataclass(frozen=True)
class PotentialContext:
    """Linear potential phi = phi0 + g_acc z (g_acc in 1/um)."""

    phi0: float
    g_acc: float

    def __post_init__(self):
        if not abs(self.phi0) < MAX_POTENTIAL:
            raise DomainError(f"|phi0| must be below {MAX_POTENTIAL}")

    def check_fiber(self, core_radius: float) -> None:
        if not abs(self.g_acc * core_radius) < 1e-6:
            raise DomainError("|g_acc rho| must be below 1e-6")

    def potential(self, z) -> float:
        return self.phi0 + self.g_acc * np.asarray(z)


@dataclass(frozen=True)
class PpnMetric:
    """g = -(1 + 2 alpha phi) dt^2 + (1 - 2 gamma phi) dx^2 with phi = phi0 + g_acc z."""

    alpha_lpi: float
    gamma: float
    phi0: float
    g_acc: float


def xi(x) -> np.ndarray:
    """Vector field (xz, yz, (z^2 - x^2 - y^2)/2)."""
    x, y, z = np.asarray(x, dtype=float)
    return np.array([x * z, y * z, 0.5 * (z * z - x * x - y * y)])


def xi_jacobian(x) -> np.ndarray:
    """D[i, j] = d xi_i / d x_j."""
    x, y, z = np.asarray(x, dtype=float)
    return np.array([[z, 0.0, x], [0.0, z, y], [-x, -y, z]])


@dataclass(frozen=True)
class PpnReduction:
    deviation: np.ndarray  # transformed spatial metric minus identity
    max_deviation: float
    bound_term: float  # gamma^2 |phi0 phi| + gamma^2 g^2 |x'|^2

    @property
    def ratio(self) -> float:
        return self.max_deviation / self.bound_term if self.bound_term > 0 else 0.0


def ppn_reduce(metric: PpnMetric, point) -> PpnReduction:
    """Residual of the Newtonian reduction x = x' + gamma g xi(x') at x'.

    After the coordinate change and the rescaling by sqrt(1 - 2 gamma phi0)
    the spatial metric is I + deviation. The deviation is computed from its
    expanded form, in which the first-order terms cancel analytically:

        (1 - 2 gamma phi0) deviation = -4 gamma phi0 eps z I + (1 - 2 gamma phi0) eps^2 D^T D
            - 4 eps^2 z^2 I - 2 eps^3 z D^T D - 2 eps^2 xi_z J^T J

    with eps = gamma g, D the Jacobian of xi and J = I + eps D.
    """
    xp = np.asarray(point, dtype=float)
    gamma, phi0, g = metric.gamma, metric.phi0, metric.g_acc
    eps = gamma * g
    r = float(np.linalg.norm(xp))
    if abs(eps) * r >= 1e-3 or abs(phi0) >= MAX_POTENTIAL:
        raise DomainError("point outside the linearization box |gamma g x| < 1e-3")
    z = xp[2]
    D = xi_jacobian(xp)
    J = np.eye(3) + eps * D
    DtD = D.T @ D
    scale = 1.0 - 2.0 * gamma * phi0
    num = (
        -4.0 * gamma * phi0 * eps * z * np.eye(3)
        + scale * eps**2 * DtD
        - 4.0 * eps**2 * z**2 * np.eye(3)
        - 2.0 * eps**3 * z * DtD
        - 2.0 * eps**2 * xi(xp)[2] * (J.T @ J)
    )
    dev = num / scale
    phi = phi0 + g * z
    bound = gamma**2 * abs(phi0 * phi) + gamma**2 * g**2 * r**2
    return PpnReduction(dev, float(np.max(np.abs(dev))), float(bound))


def transformed_spatial_metric(metric: PpnMetric, point) -> np.ndarray:
    """Direct (cancelling) evaluation of the transformed spatial metric, for comparison."""
    xp = np.asarray(point, dtype=float)
    eps = metric.gamma * metric.g_acc
    x = xp + eps * xi(xp)
    J = np.eye(3) + eps * xi_jacobian(xp)
    phi = metric.phi0 + metric.g_acc * x[2]
    return (1 - 2 * metric.gamma * phi) * (J.T @ J) / (1 - 2 * metric.gamma * metric.phi0)


# ---------------------------------------------------------------------------
# uniform potential


def apply_uniform_potential(mode: ModeSolution, phi: float) -> ModeSolution:
    """Mode of the same fiber placed in a uniform potential phi.

    The indices are rescaled n -> (1 - phi) n at fixed coordinate frequency
    omega and the mode is re-solved. KG products acquire a factor (1 + phi),
    so the normalization factor becomes sqrt(1 + phi) N.
    """
    if not abs(phi) < MAX_POTENTIAL:
        raise DomainError(f"|phi| must be below {MAX_POTENTIAL}")
    if phi == mode.potential:
        return mode
    flat = mode.spec.scaled(1.0 / (1.0 - mode.potential))
    spec = flat.scaled(1.0 - phi)
    roots = solve_modes(spec, mode.omega, mode.m, mode.family)
    if not roots:
        raise SolverError("mode is not guided in the rescaled fiber")
    key, pt = min(roots, key=lambda kp: abs(kp[1].b - mode.point.b))
    base = build_mode(spec, key, pt)
    s = np.sqrt(1.0 + phi)
    coeffs = ModeCoefficients(base.q / s, base.p / s, base.norm_factor * s)
    return replace(base, coeffs=coeffs, potential=float(phi))


def physical_frequency(mode: ModeSolution) -> float:
    """omega_ph = (1 - phi) omega measured in the rest frame of the fiber."""
    return (1.0 - mode.potential) * mode.omega


def physical_effective_index(mode: ModeSolution) -> float:
    """beta_ph / omega_ph with beta_ph = beta."""
    return mode.beta / physical_frequency(mode)


def killing_remap(beta_local: float, phi: float) -> float:
    """Killing propagation constant beta = (1 + phi) beta_local."""
    if not abs(phi) < MAX_POTENTIAL:
        raise DomainError(f"|phi| must be below {MAX_POTENTIAL}")
    return (1.0 + phi) * beta_local


def killing_unmap(beta: float, phi: float) -> float:
    """Local propagation constant from the Killing one."""
    if not abs(phi) < MAX_POTENTIAL:
        raise DomainError(f"|phi| must be below {MAX_POTENTIAL}")
    return beta / (1.0 + phi)


def redshift_wavefunction(wf: BinnedWavefunction, phi1: float, phi2: float) -> BinnedWavefunction:
    """Wave function psi'' on local bins at phi2 of a photon described by psi' at phi1.

    Bins map through the common Killing value, beta'' = (1 + phi1) beta' / (1 + phi2),
    and amplitudes pick up sqrt((1 + phi2)/(1 + phi1)) (= sqrt(1 - phi1 + phi2) to
    first order), which keeps sum |psi|^2 dbeta unchanged.
    """
    ratio = (1.0 + phi1) / (1.0 + phi2)
    centers = np.array([killing_unmap(killing_remap(b, phi1), phi2) for b in wf.centers])
    return BinnedWavefunction(centers, wf.widths * ratio, wf.amplitudes / np.sqrt(ratio))


def to_killing(wf: BinnedWavefunction, phi: float) -> BinnedWavefunction:
    """Amplitudes with respect to the Killing-parametrized operators a(beta)."""
    s = 1.0 + phi
    centers = np.array([killing_remap(b, phi) for b in wf.centers])
    return BinnedWavefunction(centers, wf.widths * s, wf.amplitudes / np.sqrt(s))


def gravitational_phase_shift(n_eff: float, omega: float, g_acc: float, length: float, dz: float) -> float:
    """Delta psi = -n omega g L dz (geometric units, lengths in um)."""
    return -n_eff * omega * g_acc * length * dz


def arm_phase(n_eff: float, omega: float, length: float, phi: float) -> float:
    """Phase beta L accumulated along a horizontal arm at potential phi."""
    return n_eff * omega * (1.0 - phi) * length
