"""Truncated Krein-Fock space of physical (a), gauge (b) and ghost (c) excitations.

The continuum delta(beta - beta') of the ladder commutators is binned: a bin
of width dbeta carries weight w = 1/dbeta and the only non-vanishing
commutators are

    [a_i, a_j^dag] = [b_i, c_j^dag] = [c_i, b_j^dag] = w_i delta_ij.

Basis states are |n> = prod_x (x^dag)^n_x / sqrt(n_x!) |0>, labelled by
occupations of slots (kind, bin).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import CapacityError, DomainError, IntegrityError

DEFAULT_CAP = 4


class Kind(str, Enum):
    PHYSICAL = "a"
    GAUGE = "b"
    GHOST = "c"


# the annihilator x pairs with the creator PARTNER[x]^dag
PARTNER = {Kind.PHYSICAL: Kind.PHYSICAL, Kind.GAUGE: Kind.GHOST, Kind.GHOST: Kind.GAUGE}


class StateClass(str, Enum):
    GHOST = "ghost"
    GAUGE = "gauge"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class ModeBin:
    """A propagation-constant bin of one (m, kappa) mode type."""

    label: str
    beta_center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("bin width must be positive")

    @property
    def weight(self) -> float:
        return 1.0 / self.width


def _slot_key(slot):
    kind, b = slot
    return (b.label, b.beta_center, b.width, kind.value)


def _normalize(occ: dict) -> tuple:
    return tuple(sorted(((s, n) for s, n in occ.items() if n), key=lambda sn: _slot_key(sn[0])))


def total_occupation(occupation: tuple) -> int:
    return sum(n for _, n in occupation)


@dataclass(frozen=True)
class KreinState:
    """Finite superposition of occupation basis states."""

    amplitudes: Mapping[tuple, complex] = field(default_factory=dict)
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        clean = {}
        for occ, amp in dict(self.amplitudes).items():
            occ = _normalize(dict(occ))
            if total_occupation(occ) > self.cap:
                raise CapacityError(f"occupation {total_occupation(occ)} exceeds cap {self.cap}")
            clean[occ] = clean.get(occ, 0j) + complex(amp)
        clean = {k: v for k, v in clean.items() if v != 0}
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))

    @classmethod
    def vacuum(cls, cap: int = DEFAULT_CAP) -> "KreinState":
        return cls({(): 1.0}, cap)

    @classmethod
    def zero(cls, cap: int = DEFAULT_CAP) -> "KreinState":
        return cls({}, cap)

    @classmethod
    def basis(cls, occupation: Mapping, cap: int = DEFAULT_CAP) -> "KreinState":
        """Normalized basis state from a {(kind, bin): n} mapping."""
        return cls({_normalize(dict(occupation)): 1.0}, cap)

    def __add__(self, other: "KreinState") -> "KreinState":
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0j) + v
        return KreinState(out, max(self.cap, other.cap))

    def __sub__(self, other: "KreinState") -> "KreinState":
        return self + (-1.0) * other

    def __mul__(self, c) -> "KreinState":
        return KreinState({k: c * v for k, v in self.amplitudes.items()}, self.cap)

    __rmul__ = __mul__

    def __neg__(self) -> "KreinState":
        return (-1.0) * self

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.amplitudes.values())

    def contains(self, kind: Kind) -> bool:
        """True if some component has an excitation of the given kind."""
        return any(s[0] is kind for occ in self.amplitudes for s, _ in occ)

    def pseudo_norm(self) -> float:
        return pseudo_inner(self, self).real


def create(state: KreinState, kind: Kind, bin_: ModeBin) -> KreinState:
    """x^dag |n> = sqrt(n_x + 1) |n + 1_x>."""
    slot = (Kind(kind), bin_)
    out = {}
    for occ, amp in state.amplitudes.items():
        d = dict(occ)
        n = d.get(slot, 0)
        d[slot] = n + 1
        if total_occupation(occ) + 1 > state.cap:
            raise CapacityError(f"creating {kind} excitation exceeds cap {state.cap}")
        key = _normalize(d)
        out[key] = out.get(key, 0j) + math.sqrt(n + 1) * amp
    return KreinState(out, state.cap)


def annihilate(state: KreinState, kind: Kind, bin_: ModeBin) -> KreinState:
    """Annihilator x of the given kind; it removes an excitation of the partner kind.

    x (y^dag)^k / sqrt(k!) |0> = sqrt(k) w (y^dag)^(k-1) / sqrt((k-1)!) |0>, y = PARTNER[x].
    """
    slot = (PARTNER[Kind(kind)], bin_)
    out = {}
    for occ, amp in state.amplitudes.items():
        d = dict(occ)
        n = d.get(slot, 0)
        if n == 0:
            continue
        d[slot] = n - 1
        key = _normalize(d)
        out[key] = out.get(key, 0j) + math.sqrt(n) * bin_.weight * amp
    return KreinState(out, state.cap)


def _expand_slots(occ: tuple) -> list:
    return [s for s, n in occ for _ in range(n)]


def _permanent(mat: np.ndarray) -> complex:
    n = mat.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for perm in itertools.permutations(range(n)):
        prod = 1.0
        for i, j in enumerate(perm):
            prod *= mat[i, j]
            if prod == 0:
                break
        total += prod
    return total


def single_gram(x, y) -> float:
    """<0| x y^dag |0> for slots x (bra) and y (ket)."""
    (kx, bx), (ky, by) = x, y
    if bx != by or PARTNER[kx] is not ky:
        return 0.0
    return bx.weight


@lru_cache(maxsize=65536)
def basis_overlap(occ_bra: tuple, occ_ket: tuple) -> float:
    """<n|n'> as the permanent of the single-excitation Gram over all pairings."""
    xs, ys = _expand_slots(occ_bra), _expand_slots(occ_ket)
    if len(xs) != len(ys):
        return 0.0
    mat = np.array([[single_gram(x, y) for y in ys] for x in xs], dtype=float).reshape(len(xs), len(ys))
    norm = math.prod(math.factorial(n) for _, n in occ_bra) * math.prod(math.factorial(n) for _, n in occ_ket)
    return float(_permanent(mat) / math.sqrt(norm))


def pseudo_inner(bra: KreinState, ket: KreinState) -> complex:
    """Indefinite inner product <bra|ket> (antilinear in bra)."""
    by_total = {}
    for occ, amp in ket.amplitudes.items():
        by_total.setdefault(total_occupation(occ), []).append((occ, amp))
    total = 0j
    for occ_a, amp_a in bra.amplitudes.items():
        for occ_b, amp_b in by_total.get(total_occupation(occ_a), ()):
            g = basis_overlap(occ_a, occ_b)
            if g:
                total += np.conj(amp_a) * amp_b * g
    return complex(total)


def reference_norm(state: KreinState) -> float:
    """Positive-definite scale sum |A_n|^2 prod w^n used for zero tests."""
    return float(
        sum(abs(a) ** 2 * math.prod(s[1].weight ** n for s, n in occ) for occ, a in state.amplitudes.items())
    )


def gupta_bleuler_classify(state: KreinState, tol: float = 1e-12) -> StateClass:
    """Ghost if a ghost excitation is present, else Gauge (null) or Physical (positive)."""
    if state.contains(Kind.GHOST):
        return StateClass.GHOST
    norm = pseudo_inner(state, state).real
    if abs(norm) <= tol * reference_norm(state):
        return StateClass.GAUGE
    if norm < 0:
        raise IntegrityError(f"state without ghost excitations has negative pseudo-norm {norm!r}")
    return StateClass.PHYSICAL


def gauge_quotient(state: KreinState) -> KreinState:
    """Representative of the class modulo null gauge states: every component holding a
    gauge excitation is dropped (such components are orthogonal to all ghost-free states)."""
    if gupta_bleuler_classify(state) is StateClass.GHOST:
        raise DomainError("ghost states have no gauge-quotient representative")
    keep = {occ: a for occ, a in state.amplitudes.items() if not any(s[0] is Kind.GAUGE for s, _ in occ)}
    return KreinState(keep, state.cap)


# ---------------------------------------------------------------------------
# wave packets


@dataclass(frozen=True)
class BinnedWavefunction:
    """Amplitudes psi on bins (centers, widths); norm sum |psi|^2 dbeta."""

    centers: np.ndarray
    widths: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        w = np.asarray(self.widths, dtype=float)
        a = np.asarray(self.amplitudes, dtype=complex)
        if not (c.shape == w.shape == a.shape) or c.ndim != 1:
            raise DomainError("centers, widths and amplitudes must be 1-d arrays of equal length")
        if np.any(w <= 0):
            raise DomainError("bin widths must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2 * self.widths))

    def bins(self, label: str) -> list:
        return [ModeBin(label, float(c), float(w)) for c, w in zip(self.centers, self.widths)]


@dataclass(frozen=True)
class WavePacketOperator:
    """x_psi^dag = sum_i psi_i dbeta_i x_i^dag for one excitation kind."""

    kind: Kind
    bins: tuple
    coefficients: np.ndarray  # psi_i * dbeta_i

    def create(self, state: KreinState) -> KreinState:
        out = KreinState.zero(state.cap)
        for b, c in zip(self.bins, self.coefficients):
            out = out + c * create(state, self.kind, b)
        return out

    def annihilate(self, state: KreinState) -> KreinState:
        """Adjoint x_psi = sum_i conj(psi_i) dbeta_i x_i, x the annihilator paired with kind."""
        partner = PARTNER[self.kind]
        out = KreinState.zero(state.cap)
        for b, c in zip(self.bins, self.coefficients):
            out = out + np.conj(c) * annihilate(state, partner, b)
        return out


def wavepacket_creator(wf: BinnedWavefunction, label: str = "psi", kind: Kind = Kind.PHYSICAL,
                       tol: float = 1e-12) -> WavePacketOperator:
    """Creation operator of a normalized binned wave packet."""
    if abs(wf.norm() - 1.0) > tol:
        raise DomainError(f"wave packet norm {wf.norm()!r} differs from 1")
    return WavePacketOperator(Kind(kind), tuple(wf.bins(label)), wf.amplitudes * wf.widths)


# ---------------------------------------------------------------------------
# linear mode maps and special states


def apply_linear_map(state: KreinState, mapping: Mapping) -> KreinState:
    """Substitute x^dag -> sum_y c_xy y^dag for every slot x in mapping.

    mapping: {slot: [(slot', c), ...]}; slots absent from the mapping are kept.
    """
    out = KreinState.zero(state.cap)
    for occ, amp in state.amplitudes.items():
        term = KreinState.vacuum(state.cap)
        norm = 1.0
        for slot, n in occ:
            norm *= math.factorial(n)
            targets = mapping.get(slot, [(slot, 1.0)])
            for _ in range(n):
                nxt = KreinState.zero(state.cap)
                for (k, b), c in targets:
                    nxt = nxt + c * create(term, k, b)
                term = nxt
        out = out + (amp / math.sqrt(norm)) * term
    return out


def coherent_state(alphas: Mapping, cap: int = DEFAULT_CAP) -> KreinState:
    """Truncated coherent state exp(-sum |alpha|^2 w / 2) sum_k (sum alpha x^dag)^k / k! |0>
    for physical slots {(Kind.PHYSICAL, bin): alpha}."""
    mean = sum(abs(a) ** 2 * slot[1].weight for slot, a in alphas.items())
    term = KreinState.vacuum(cap)
    out = term
    for k in range(1, cap + 1):
        nxt = KreinState.zero(cap)
        for (kind, b), a in alphas.items():
            nxt = nxt + a * create(term, kind, b)
        term = nxt * (1.0 / k)
        out = out + term
    return out * math.exp(-0.5 * mean)


def occupation_probability(state: KreinState, occupation: Mapping) -> float:
    """|<n|psi>|^2 / (<n|n> <psi|psi>) for a state in a positive sector."""
    n = KreinState.basis(occupation, state.cap)
    num = abs(pseudo_inner(n, state)) ** 2
    den = pseudo_inner(n, n).real * pseudo_inner(state, state).real
    if not den > 0:
        raise DomainError("probabilities need states of positive pseudo-norm")
    return float(num / den)


def gauge_violation_element(bra: KreinState, ket: KreinState, profile: Mapping) -> complex:
    """<bra| chi |ket> for chi = sum_bin (f_bin b_bin + conj(f_bin) b_bin^dag).

    profile: {bin: f_bin}, the ghost-mode gauge violation attached to each bin.
    """
    total = 0j
    for b, f in profile.items():
        total += f * pseudo_inner(bra, annihilate(ket, Kind.GAUGE, b))
        # <bra| b^dag |ket> = conj(<ket| b |bra>)
        total += np.conj(f) * np.conj(pseudo_inner(ket, annihilate(bra, Kind.GAUGE, b)))
    return complex(total)
