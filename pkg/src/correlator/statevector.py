"""Dense statevector simulation with Pauli-level primitives.

Every Pauli string acts on a basis index ``b`` as
``P|b> = phase * i^{n_Y} * (-1)^{popcount(b & z_mask)} |b ^ x_mask>``,
which is all this module needs to apply exponentials, Trotter steps and
expectation values without building matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Literal, Sequence

import numpy as np

from .exceptions import ConfigurationError, DimensionError, ResourceError, StateError
from .pauli import PauliString, PauliSum

ExpKind = Literal["real_time", "imaginary_time"]

DEFAULT_ORACLE_MAX_QUBITS = 12
_STEP_TOL = 1e-9


@dataclass
class StateVector:
    """Amplitudes over ``n_qubits`` plus the log of norms discarded so far."""

    n_qubits: int
    amplitudes: np.ndarray
    norm_log: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise DimensionError(f"expected {2**self.n_qubits} amplitudes, got {amps.size}")
        self.amplitudes = amps

    @classmethod
    def from_array(cls, amplitudes, normalize: bool = True) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size)))
        if 2**n != amps.size:
            raise DimensionError("amplitude count must be a power of two")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis state, e.g. ``basis("0110")`` with qubit 0 leftmost."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def product(cls, single_qubit_states: Sequence[Sequence[complex]]) -> "StateVector":
        amps = np.array([1.0 + 0j])
        for s in single_qubit_states:
            s = np.asarray(s, dtype=complex)
            amps = np.kron(amps, s / np.linalg.norm(s))
        return cls(len(single_qubit_states), amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(), self.norm_log)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2 / (self.norm() ** 2 * other.norm() ** 2)


def zero_state(n_qubits: int) -> StateVector:
    return StateVector.basis("0" * n_qubits)


def plus_state(n_qubits: int) -> StateVector:
    return StateVector(n_qubits, np.full(2**n_qubits, 2 ** (-n_qubits / 2), dtype=complex))


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return StateVector.from_array(amps)


def random_product_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    return StateVector.product([rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(n_qubits)])


# -- low-level Pauli action ------------------------------------------------

@lru_cache(maxsize=None)
def _indices(n_qubits: int) -> np.ndarray:
    return np.arange(2**n_qubits, dtype=np.int64)


@lru_cache(maxsize=4096)
def _pauli_tables(letters: str) -> tuple[np.ndarray, np.ndarray, bool]:
    """Return ``(perm, sign, diagonal)`` with ``P psi = (sign * psi)[perm]``."""
    p = PauliString(letters)
    x, z, ny = p.masks
    idx = _indices(p.n_qubits)
    parity = (np.bitwise_count(idx & z) & 1).astype(np.int64)
    sign = (1 - 2 * parity).astype(complex) * (1j**ny)
    perm = idx ^ x
    perm.setflags(write=False)
    sign.setflags(write=False)
    return perm, sign, x == 0


def pauli_apply(amps: np.ndarray, p: PauliString) -> np.ndarray:
    """Return ``P |amps>`` as a new array."""
    perm, sign, diagonal = _pauli_tables(p.letters)
    out = sign * amps
    if not diagonal:
        out = out[perm]
    return p.phase * out if p.phase != 1 else out


def pauli_sum_apply(amps: np.ndarray, op: PauliSum) -> np.ndarray:
    out = np.zeros_like(amps)
    for c, s in op.terms:
        perm, sign, diagonal = _pauli_tables(s)
        term = sign * amps
        out += c * (term if diagonal else term[perm])
    return out


def _check_size(state: StateVector, n_qubits: int):
    if state.n_qubits != n_qubits:
        raise DimensionError(f"{state.n_qubits}-qubit state vs {n_qubits}-qubit operator")


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    _check_size(state, p.n_qubits)
    return StateVector(state.n_qubits, pauli_apply(state.amplitudes, p), state.norm_log)


def apply_pauli_exponential(state: StateVector, p: PauliString, tau: float,
                            kind: ExpKind = "real_time") -> StateVector:
    """Apply ``exp(-i tau P)`` or the normalized ``exp(-tau P)``.

    Both use the involution ``P^2 = I``: ``cos(tau) - i sin(tau) P`` and
    ``cosh(tau) - sinh(tau) P``. The imaginary-time branch renormalizes and
    adds ``log ||exp(-tau P) psi||`` to ``norm_log``.
    """
    _check_size(state, p.n_qubits)
    if not p.is_hermitian():
        raise ValueError(f"exponent generator {p} is not Hermitian")
    psi = state.amplitudes
    p_psi = pauli_apply(psi, p)
    if kind == "real_time":
        return StateVector(state.n_qubits, math.cos(tau) * psi - 1j * math.sin(tau) * p_psi, state.norm_log)
    if kind == "imaginary_time":
        out = math.cosh(tau) * psi - math.sinh(tau) * p_psi
        nrm = float(np.linalg.norm(out))
        if nrm == 0.0:
            raise StateError("imaginary-time evolution annihilated the state")
        return StateVector(state.n_qubits, out / nrm, state.norm_log + math.log(nrm))
    raise ValueError(f"unknown exponential kind {kind!r}")


def expectation(state: StateVector, obs: PauliSum) -> float:
    """Real expectation value ``<psi|obs|psi>`` of a Hermitian observable."""
    if not obs.is_hermitian():
        raise ValueError("observable must be Hermitian")
    return float(expectation_complex(state, obs).real)


def expectation_complex(state: StateVector, op: PauliSum) -> complex:
    """``<psi|op|psi>`` for any Pauli sum (no Hermiticity requirement)."""
    _check_size(state, op.n_qubits)
    psi = state.amplitudes
    return complex(np.vdot(psi, pauli_sum_apply(psi, op)))


def pauli_expectations(state: StateVector, strings: Sequence[str]) -> np.ndarray:
    """Real expectations of phase-free Pauli strings, one per entry."""
    psi = state.amplitudes
    out = np.empty(len(strings))
    for k, s in enumerate(strings):
        perm, sign, diagonal = _pauli_tables(s)
        term = sign * psi
        out[k] = np.vdot(psi, term if diagonal else term[perm]).real
    return out


# -- Hamiltonian evolution ---------------------------------------------------

class _TrotterStep:
    """Precompiled Pauli-exponential sequence for one Trotter step of length ``dt``.

    Consecutive diagonal terms commute, so each run of them is fused into one
    phase vector; the product is unchanged.
    """

    def __init__(self, groups: Sequence[PauliSum], order: int, dt: float):
        seq = [(c.real * dt, s) for g in groups for c, s in g.terms]
        if order == 2:
            half = [(a / 2, s) for a, s in seq]
            seq = half + half[::-1]
        elif order != 1:
            raise ConfigurationError(f"Trotter order must be 1 or 2, got {order}")
        self.forward = self._compile(seq)
        inverse = [(-a, s) for a, s in seq[::-1]]
        self.backward = self._compile(inverse)

    @staticmethod
    def _compile(seq):
        ops = []
        diag_phase = None
        for angle, s in seq:
            perm, sign, diagonal = _pauli_tables(s)
            if diagonal:
                contrib = angle * sign.real
                diag_phase = contrib if diag_phase is None else diag_phase + contrib
                continue
            if diag_phase is not None:
                ops.append(("diag", np.exp(-1j * diag_phase)))
                diag_phase = None
            ops.append(("pauli", (math.cos(angle), -1j * math.sin(angle), perm, sign)))
        if diag_phase is not None:
            ops.append(("diag", np.exp(-1j * diag_phase)))
        return ops

    @staticmethod
    def run(ops, psi: np.ndarray) -> np.ndarray:
        for kind, data in ops:
            if kind == "diag":
                psi = data * psi
            else:
                c, s, perm, sign = data
                psi = c * psi + s * (sign * psi)[perm]
        return psi


@dataclass(eq=False)
class EvolutionBackend:
    """How ``U(t_to; t_from) = exp(-i H (t_to - t_from))`` is realized.

    ``kind="trotter"`` uses a product formula of ``order`` 1 or 2 with step
    ``dt``. Terms follow the canonical Pauli-sum order unless ``term_groups``
    is given, in which case the groups (which must add up to the
    Hamiltonian) are applied one after another, each in canonical order.
    ``kind="exact"`` diagonalizes the Hamiltonian once and reuses the
    eigenbasis.
    """

    hamiltonian: PauliSum
    kind: Literal["trotter", "exact"] = "exact"
    order: int = 2
    dt: float | None = None
    max_qubits: int = field(default=DEFAULT_ORACLE_MAX_QUBITS)
    term_groups: tuple[PauliSum, ...] | None = None

    def __post_init__(self):
        if not self.hamiltonian.is_hermitian():
            raise ConfigurationError("Hamiltonian must be Hermitian")
        if self.term_groups is not None:
            self.term_groups = tuple(self.term_groups)
            total = PauliSum.zero(self.hamiltonian.n_qubits)
            for g in self.term_groups:
                total = total + g
            if not total.allclose(self.hamiltonian):
                raise ConfigurationError("Trotter term groups do not add up to the Hamiltonian")
        if self.kind == "trotter":
            if self.dt is None or not self.dt > 0:
                raise ConfigurationError("Trotter backend needs a positive step dt")
            if self.order not in (1, 2):
                raise ConfigurationError(f"Trotter order must be 1 or 2, got {self.order}")
        elif self.kind != "exact":
            raise ConfigurationError(f"unknown backend kind {self.kind!r}")

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        return hamiltonian_eigensystem(self.hamiltonian, self.max_qubits)

    @cached_property
    def _step(self) -> _TrotterStep:
        groups = self.term_groups if self.term_groups is not None else (self.hamiltonian,)
        return _TrotterStep(groups, self.order, self.dt)

    def n_steps(self, duration: float) -> int:
        steps = duration / self.dt
        n = round(steps)
        if abs(steps - n) > _STEP_TOL * max(1.0, abs(steps)):
            raise ConfigurationError(f"duration {duration} is not a multiple of the Trotter step {self.dt}")
        return int(n)

    def propagate(self, amps: np.ndarray, duration: float) -> np.ndarray:
        if duration == 0:
            return amps.copy()
        if self.kind == "exact":
            evals, evecs = self.eigensystem
            return evecs @ (np.exp(-1j * evals * duration) * (evecs.conj().T @ amps))
        n = self.n_steps(duration)
        ops = self._step.forward if n > 0 else self._step.backward
        psi = amps.copy()
        for _ in range(abs(n)):
            psi = _TrotterStep.run(ops, psi)
        return psi


def hamiltonian_eigensystem(h: PauliSum, max_qubits: int = DEFAULT_ORACLE_MAX_QUBITS):
    """Dense eigendecomposition; real symmetric Hamiltonians use a real solver."""
    if h.n_qubits > max_qubits:
        raise ResourceError(f"{h.n_qubits} qubits exceed the dense cap of {max_qubits}")
    return _eigh(h)


@lru_cache(maxsize=8)
def _eigh(h: PauliSum) -> tuple[np.ndarray, np.ndarray]:
    mat = dense_matrix(h)
    if not np.any(mat.imag):
        evals, evecs = np.linalg.eigh(mat.real)
        return evals, evecs.astype(complex)
    return np.linalg.eigh(mat)


def dense_matrix(op: PauliSum) -> np.ndarray:
    """Dense matrix assembled column-free from the bit-level Pauli action."""
    dim = 2**op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    idx = _indices(op.n_qubits)
    for c, s in op.terms:
        perm, sign, _ = _pauli_tables(s)
        # column i has a single entry sign[i] in row perm[i]
        out[perm, idx] += c * sign
    return out


def evolve(state: StateVector, backend: EvolutionBackend, t_from: float, t_to: float) -> StateVector:
    _check_size(state, backend.n_qubits)
    return StateVector(state.n_qubits, backend.propagate(state.amplitudes, t_to - t_from), state.norm_log)
