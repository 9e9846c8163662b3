"""Mach-Zehnder and time-bin fiber interferometers.

Transfer matrices act on creation operators, a_in^dag = sum_k T[i, k] a_out,k^dag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quantum_states as qs
from .errors import DomainError
from .gravity import gravitational_phase_shift, killing_remap, killing_unmap
from .quantum_states import BinnedWavefunction, Kind, KreinState, ModeBin

BEAM_SPLITTER = np.array([[1.0, 1j], [1j, 1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class MziSpec:
    """Arm phases psi' (first arm) and psi'' (second arm) with their potentials."""

    phase_1: float
    phase_2: float
    phi_1: float = 0.0
    phi_2: float = 0.0

    @property
    def phase_difference(self) -> float:
        return self.phase_1 - self.phase_2

    @classmethod
    def from_gravity(cls, n_eff: float, omega: float, g_acc: float, length: float, dz: float,
                     phi0: float = 0.0) -> "MziSpec":
        """Horizontal arms of length L, the first one dz above the second."""
        dpsi = gravitational_phase_shift(n_eff, omega, g_acc, length, dz)
        return cls(dpsi, 0.0, phi0 + g_acc * dz, phi0)


def beam_splitter() -> np.ndarray:
    return BEAM_SPLITTER.copy()


def delay(phase_1: float, phase_2: float) -> np.ndarray:
    return np.diag([np.exp(1j * phase_1), np.exp(1j * phase_2)])


def mzi_transfer(spec: MziSpec) -> np.ndarray:
    """Closed-form MZI transfer matrix."""
    e1, e2 = np.exp(1j * spec.phase_1), np.exp(1j * spec.phase_2)
    return 0.5 * np.array([[e1 - e2, 1j * (e1 + e2)], [1j * (e1 + e2), -(e1 - e2)]])


def mzi_transfer_composed(spec: MziSpec) -> np.ndarray:
    """Beam splitter, arm delays, beam splitter."""
    return BEAM_SPLITTER @ delay(spec.phase_1, spec.phase_2) @ BEAM_SPLITTER


def coherent_transform(alpha_1: complex, alpha_2: complex, spec: MziSpec):
    """Output coherent amplitudes; T is symmetric so alpha' = T alpha."""
    out = mzi_transfer(spec) @ np.array([alpha_1, alpha_2], dtype=complex)
    return complex(out[0]), complex(out[1])


def single_photon_probability(dpsi: float) -> float:
    """Probability of the photon leaving through the first output port."""
    return 0.5 * (1.0 - np.cos(dpsi))


def two_photon_probability(dpsi: float) -> float:
    """Probability of both photons of |1,1> leaving through the same port."""
    return 0.5 * (1.0 - np.cos(2.0 * dpsi))


# ---------------------------------------------------------------------------
# Fock-space simulation


PORT_IN = (ModeBin("in_1"), ModeBin("in_2"))
PORT_OUT = (ModeBin("out_1"), ModeBin("out_2"))


def _port_map(T: np.ndarray) -> dict:
    return {
        (Kind.PHYSICAL, PORT_IN[i]): [((Kind.PHYSICAL, PORT_OUT[k]), T[i, k]) for k in range(2)]
        for i in range(2)
    }


def propagate(state: KreinState, spec: MziSpec) -> KreinState:
    """Express an input-port state in terms of output-port operators."""
    return qs.apply_linear_map(state, _port_map(mzi_transfer_composed(spec)))


def input_state(n1: int, n2: int) -> KreinState:
    return KreinState.basis({(Kind.PHYSICAL, PORT_IN[0]): n1, (Kind.PHYSICAL, PORT_IN[1]): n2})


def output_probability(state: KreinState, n1: int, n2: int) -> float:
    occ = {(Kind.PHYSICAL, PORT_OUT[0]): n1, (Kind.PHYSICAL, PORT_OUT[1]): n2}
    return qs.occupation_probability(state, occ)


def simulate_single_photon(spec: MziSpec) -> float:
    """p1 from propagating |1,0>_in through the network."""
    return output_probability(propagate(input_state(1, 0), spec), 1, 0)


def simulate_two_photon(spec: MziSpec) -> float:
    """p2 from propagating |1,1>_in: both photons in the same output port."""
    out = propagate(input_state(1, 1), spec)
    return output_probability(out, 2, 0) + output_probability(out, 0, 2)


def two_photon_expansion(spec: MziSpec) -> dict:
    """Coefficients of a^dag^2, b^dag^2 and a^dag b^dag in a_in1^dag a_in2^dag |0>."""
    e1, e2 = np.exp(2j * spec.phase_1), np.exp(2j * spec.phase_2)
    # a1 a2 -> T00 T10 a^2 + T01 T11 b^2 + (T00 T11 + T01 T10) a b
    return {"aa": 0.25j * (e1 - e2), "bb": -0.25j * (e1 - e2), "ab": -0.5 * (e1 + e2)}


# ---------------------------------------------------------------------------
# time-bin interferometer


@dataclass(frozen=True)
class TimeBinSpec:
    """Delay lines of lengths l' and l'' at potentials differing by dphi = phi' - phi''."""

    beta_1: float
    delay_1: float
    delay_2: float
    delta_phi: float
    beta_2: float | None = None

    def __post_init__(self):
        if not (self.delay_1 > 0 and self.delay_2 > 0):
            raise DomainError("delay lengths must be positive")

    def local_beta_2(self) -> float:
        """beta'' from (1 + phi') beta' = (1 + phi'') beta'' with phi'' = 0, phi' = dphi."""
        if self.beta_2 is not None:
            return self.beta_2
        return killing_unmap(killing_remap(self.beta_1, self.delta_phi), 0.0)


def time_bin_amplitudes(spec: TimeBinSpec):
    """Amplitudes of a single photon in output modes a and b.

    a_in^dag -> (i/2)(e^{i theta'} + e^{i theta''}) a_out^dag - (1/2)(e^{i theta'} - e^{i theta''}) b_out^dag
    """
    t1 = spec.beta_1 * spec.delay_1
    t2 = spec.local_beta_2() * spec.delay_2
    e1, e2 = np.exp(1j * t1), np.exp(1j * t2)
    return 0.5j * (e1 + e2), -0.5 * (e1 - e2)


def time_bin_phase(spec: TimeBinSpec) -> float:
    return spec.beta_1 * spec.delay_1 - spec.local_beta_2() * spec.delay_2


def time_bin_probabilities(spec: TimeBinSpec):
    """(p_a, p_b) = (cos^2(delta/2), sin^2(delta/2)) with delta = beta' l' - beta'' l''."""
    d = time_bin_phase(spec)
    pa = np.cos(0.5 * d) ** 2
    return float(pa), float(1.0 - pa)


def time_bin_closed_form(beta_1: float, delay: float, delta_phi: float):
    """Equal delays: p_a = cos^2(beta' l dphi / 2), p_b = sin^2(beta' l dphi / 2)."""
    x = 0.5 * beta_1 * delay * delta_phi
    return float(np.cos(x) ** 2), float(np.sin(x) ** 2)


def bandwidth_average(probability, wf: BinnedWavefunction) -> float:
    """sum_i p(beta_i) |psi_i|^2 dbeta_i for a normalized binned wave packet."""
    weights = np.abs(wf.amplitudes) ** 2 * wf.widths
    if abs(weights.sum() - 1.0) > 1e-12:
        raise DomainError("wave packet must be normalized")
    return float(sum(w * probability(b) for w, b in zip(weights, wf.centers)))
