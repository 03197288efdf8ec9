"""Hamiltonians, operators and initial states of the three lattice models."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .pauli import PauliSum, hopping, single
from .statevector import StateVector, plus_state, zero_state


@dataclass(frozen=True)
class SchwingerParams:
    L: int = 6
    m: float = 0.5
    g: float = 0.3

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise ConfigurationError(f"Schwinger lattice needs an even L >= 2, got {self.L}")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L


@dataclass(frozen=True)
class SSHParams:
    L: int = 12
    v: float = 1.0
    delta: float = 0.8
    mu: float = -2.5

    def __post_init__(self):
        if self.L < 2:
            raise ConfigurationError(f"SSH chain needs L >= 2, got {self.L}")


@dataclass(frozen=True)
class LatticeMomentum:
    n: int
    L: int

    def __post_init__(self):
        if not -self.L / 2 <= self.n <= self.L / 2:
            raise ConfigurationError(f"momentum index {self.n} outside [-L/2, L/2] for L={self.L}")

    @property
    def k(self) -> float:
        return 2 * math.pi * self.n / self.L


# -- Schwinger model -------------------------------------------------------

def schwinger_mass_term(n_sites: int, m: float) -> PauliSum:
    """``m/2 sum_j (-1)^j Z_j`` over ``2 * n_sites`` qubits."""
    nq = 2 * n_sites
    return sum((single(nq, j, "Z", m / 2 * (-1) ** j) for j in range(nq)), PauliSum.zero(nq))


def schwinger_kinetic_term(n_sites: int) -> PauliSum:
    nq = 2 * n_sites
    return sum((0.5 * hopping(nq, j, j + 1) for j in range(nq - 1)), PauliSum.zero(nq))


def schwinger_electric_truncated(L: int, g: float) -> PauliSum:
    """Electric energy truncated at next-next-nearest-neighbour ZZ range."""
    nq = 2 * L
    terms: list[tuple[float, dict[int, str]]] = []

    def zz(c, a, b):
        terms.append((c, {a: "Z", b: "Z"}))

    def z(c, a):
        terms.append((c, {a: "Z"}))

    for j in range(L // 2):
        zz(L / 2 - 0.75 - j, 2 * j, 2 * j + 1)
        zz(j + 0.25, L + 2 * j, L + 2 * j + 1)
    for j in range(1, L // 2 - 1):
        z(1.0, 2 * j)
        z(0.5, 2 * j + 1)
        z(-0.5, L + 2 * j)
        z(-1.0, L + 2 * j + 1)
    for c, q in ((1.0, 0), (0.5, 1), (0.5, L - 2), (-0.5, L + 1), (-0.5, 2 * L - 2), (-1.0, 2 * L - 1)):
        z(c, q)
    for j in range(L // 2 - 1):
        for q in (2 * j, 2 * j + 1):
            zz(L / 2 - 1.25 - j, q, 2 * j + 2)
            zz(L / 2 - 1.75 - j, q, 2 * j + 3)
        for q in (L + 2 * j + 2, L + 2 * j + 3):
            zz(j + 0.25, q, L + 2 * j)
            zz(j + 0.75, q, L + 2 * j + 1)

    out = PauliSum.zero(nq)
    for c, sites in terms:
        out = out + PauliSum.from_sites(nq, sites, g**2 / 2 * c)
    return out


def build_schwinger_truncated(p: SchwingerParams) -> PauliSum:
    return (schwinger_mass_term(p.L, p.m) + schwinger_kinetic_term(p.L)
            + schwinger_electric_truncated(p.L, p.g))


def build_schwinger_full(p: SchwingerParams) -> PauliSum:
    """Untruncated open-boundary Hamiltonian with ``(sum_{l<=j} Q_l)^2`` electric energy."""
    nq = p.n_qubits
    electric = PauliSum.zero(nq)
    for j in range(nq - 1):
        field_j = PauliSum.zero(nq)
        for l in range(j + 1):
            field_j = field_j + single(nq, l, "Z", 0.5) + PauliSum.identity(nq, 0.5 * (-1) ** l)
        electric = electric + field_j * field_j
    return schwinger_mass_term(p.L, p.m) + schwinger_kinetic_term(p.L) + p.g**2 / 2 * electric


def brickwork_groups(h: PauliSum) -> tuple[PauliSum, PauliSum, PauliSum]:
    """Split into off-diagonal terms starting on even qubits, on odd qubits, and the diagonal rest.

    This is the usual circuit layout for nearest-neighbour hopping chains.
    """
    nq = h.n_qubits
    buckets: list[list] = [[], [], []]
    for c, s in h.terms:
        if set(s) <= {"I", "Z"}:
            buckets[2].append((c, s))
        else:
            first = min(q for q, letter in enumerate(s) if letter != "I")
            buckets[first % 2].append((c, s))
    return tuple(PauliSum.from_terms(nq, b) for b in buckets)


def hadron_operator(j: int, n_sites: int) -> PauliSum:
    """Anti-Hermitian ``-i(sigma+_{2j} sigma-_{2j+1} + h.c.)`` on ``2 * n_sites`` qubits."""
    if not 0 <= j < n_sites:
        raise ConfigurationError(f"site {j} outside lattice of {n_sites} sites")
    return -1j * hopping(2 * n_sites, 2 * j, 2 * j + 1)


def default_source_site(L: int) -> int:
    return math.ceil(L / 2)


def momentum_hadron_correlator_spec(k: LatticeMomentum | float, L: int,
                                    j0: int | None = None) -> list[tuple[int, complex]]:
    """Sites and weights ``exp(-ik(j + j0))`` of the momentum-projected commutators."""
    if j0 is None:
        j0 = default_source_site(L)
    if not 0 <= j0 < L:
        raise ConfigurationError(f"source site {j0} outside lattice of {L} sites")
    kval = k.k if isinstance(k, LatticeMomentum) else float(k)
    return [(j, complex(np.exp(-1j * kval * (j + j0)))) for j in range(L)]


def bare_vacuum(n_sites: int) -> StateVector:
    """Computational ground state of the staggered mass term with ``m > 0``.

    Even qubits carry ``+m/2 Z`` and sit in ``|1>``; odd qubits sit in ``|0>``.
    """
    bits = "".join("1" if q % 2 == 0 else "0" for q in range(2 * n_sites))
    return StateVector.basis(bits)


def reflection_operator(n_qubits: int) -> np.ndarray:
    """Dense spatial reflection ``q -> n-1-q`` combined with a global spin flip.

    The flip is needed because reversal alone maps the staggered mass term to
    its negative.
    """
    dim = 2**n_qubits
    idx = np.arange(dim)
    reversed_bits = np.zeros(dim, dtype=np.int64)
    for q in range(n_qubits):
        reversed_bits |= ((idx >> q) & 1) << (n_qubits - 1 - q)
    target = reversed_bits ^ (dim - 1)
    out = np.zeros((dim, dim))
    out[target, idx] = 1.0
    return out


# -- SSH and transverse-field Ising -----------------------------------------

def build_ssh(p: SSHParams) -> PauliSum:
    out = PauliSum.zero(p.L)
    for j in range(p.L - 1):
        out = out + (-(p.v + (-1) ** j * p.delta / 2)) * hopping(p.L, j, j + 1)
    for j in range(p.L):
        out = out + single(p.L, j, "Z", p.mu / 2)
    return out


def ssh_single_particle_matrix(p: SSHParams) -> np.ndarray:
    """Free-fermion hopping matrix with occupation ``n = (1 - Z)/2``."""
    h = np.diag(np.full(p.L, -p.mu))
    for j in range(p.L - 1):
        t = p.v + (-1) ** j * p.delta / 2
        h[j, j + 1] = h[j + 1, j] = -t
    return h


def ssh_free_fermion_ground_energy(p: SSHParams) -> float:
    eps = np.linalg.eigvalsh(ssh_single_particle_matrix(p))
    return p.mu * p.L / 2 + float(eps[eps < 0].sum())


def ssh_probe_operator(k: float, L: int) -> PauliSum:
    """``sum_j cos(kj) X_j``, the source operator of the fermionic correlator."""
    return sum((single(L, j, "X", math.cos(k * j)) for j in range(L)), PauliSum.zero(L))


def build_tim(L: int) -> PauliSum:
    """``-sum X_j X_{j+1} - sum Z_j`` with open boundaries."""
    if L < 2:
        raise ConfigurationError(f"Ising chain needs L >= 2, got {L}")
    out = PauliSum.zero(L)
    for j in range(L - 1):
        out = out + PauliSum.from_sites(L, {j: "X", j + 1: "X"}, -1.0)
    for j in range(L):
        out = out + single(L, j, "Z", -1.0)
    return out


__all__ = [
    "SchwingerParams", "SSHParams", "LatticeMomentum",
    "build_schwinger_truncated", "build_schwinger_full", "schwinger_mass_term",
    "schwinger_kinetic_term", "schwinger_electric_truncated", "brickwork_groups",
    "hadron_operator", "momentum_hadron_correlator_spec", "default_source_site",
    "bare_vacuum", "plus_state", "zero_state", "reflection_operator",
    "build_ssh", "ssh_free_fermion_ground_energy", "ssh_probe_operator", "build_tim",
]
