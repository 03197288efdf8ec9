"""Exact references built on dense eigendecompositions.

These routines never use the parameter-shift machinery or the simulator's
bit-level Pauli action: matrices come from Kronecker products and the
Hamiltonian is diagonalized here. They are the independent route that the
circuit-based estimators are checked against.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import ConfigurationError, DimensionError, ResourceError
from .pauli import PauliString, PauliSum
from .statevector import DEFAULT_ORACLE_MAX_QUBITS, StateVector


def _as_sum(op: PauliSum | PauliString) -> PauliSum:
    return PauliSum.from_string(op) if isinstance(op, PauliString) else op


def kron_matrix(op: PauliSum | PauliString) -> np.ndarray:
    return _as_sum(op).to_matrix()


@lru_cache(maxsize=4)
def _kron_eigh(h: PauliSum) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(kron_matrix(h))


class ExactPropagator:
    """``exp(-i H t)`` applied through a cached eigenbasis."""

    def __init__(self, hamiltonian: PauliSum, max_qubits: int = DEFAULT_ORACLE_MAX_QUBITS):
        if hamiltonian.n_qubits > max_qubits:
            raise ResourceError(f"{hamiltonian.n_qubits} qubits exceed the oracle cap of {max_qubits}")
        self.n_qubits = hamiltonian.n_qubits
        self.evals, self.evecs = _kron_eigh(hamiltonian)

    def apply(self, amps: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return amps
        return self.evecs @ (np.exp(-1j * self.evals * t) * (self.evecs.conj().T @ amps))

    def unitary(self, t: float) -> np.ndarray:
        return (self.evecs * np.exp(-1j * self.evals * t)) @ self.evecs.conj().T

    def heisenberg(self, op: PauliSum | PauliString, t: float) -> np.ndarray:
        """Dense ``U(t)^dag O U(t)``."""
        u = self.unitary(t)
        return u.conj().T @ kron_matrix(op) @ u


def exact_correlator_oracle(operators: Sequence[PauliSum | PauliString], times: Sequence[float],
                            state: StateVector, hamiltonian: PauliSum,
                            max_qubits: int = DEFAULT_ORACLE_MAX_QUBITS) -> complex:
    """``<phi| O_{n-1}(t_{n-1}) ... O_0(t_0) |phi>`` by alternating exact propagation.

    Only vectors are propagated, so the cost is a handful of dense
    matrix-vector products once the Hamiltonian is diagonalized.
    """
    if len(operators) != len(times):
        raise ConfigurationError("need one time per operator")
    for op in operators:
        if op.n_qubits != hamiltonian.n_qubits:
            raise DimensionError("operator and Hamiltonian sizes differ")
    prop = ExactPropagator(hamiltonian, max_qubits)
    vec = state.amplitudes
    now = 0.0
    for op, t in zip(operators, times):
        vec = prop.apply(vec, t - now)
        vec = kron_matrix(op) @ vec
        now = t
    vec = prop.apply(vec, -now)
    return complex(np.vdot(state.amplitudes, vec))


def dense_nested_bracket(operators: Sequence[PauliSum | PauliString], times: Sequence[float],
                         signs: Sequence[str], state: StateVector, hamiltonian: PauliSum,
                         max_qubits: int = DEFAULT_ORACLE_MAX_QUBITS) -> complex:
    """``<phi|[[...[O_{n-1}, O_{n-2}]_{b_{n-2}}, ...], O_0]_{b_0}|phi>`` from dense matrices."""
    if not len(operators) == len(times) == len(signs) + 1:
        raise ConfigurationError("need n operators, n times and n-1 signs")
    prop = ExactPropagator(hamiltonian, max_qubits)
    acc = prop.heisenberg(operators[-1], times[-1])
    for j in range(len(signs) - 1, -1, -1):
        oj = prop.heisenberg(operators[j], times[j])
        if signs[j] == "+":
            acc = acc @ oj + oj @ acc
        elif signs[j] == "-":
            acc = acc @ oj - oj @ acc
        else:
            raise ConfigurationError(f"bracket sign must be '+' or '-', got {signs[j]!r}")
    psi = state.amplitudes
    return complex(np.vdot(psi, acc @ psi))


def dense_otoc(w: PauliString, v: PauliString, t: float, state: StateVector,
               hamiltonian: PauliSum, max_qubits: int = DEFAULT_ORACLE_MAX_QUBITS) -> complex:
    """``<phi|W(t) V W(t) V|phi>`` from dense matrices."""
    prop = ExactPropagator(hamiltonian, max_qubits)
    wt = prop.heisenberg(w, t)
    vm = kron_matrix(v)
    psi = state.amplitudes
    return complex(np.vdot(psi, wt @ vm @ wt @ vm @ psi))


__all__ = ["kron_matrix", "ExactPropagator", "exact_correlator_oracle", "dense_nested_bracket", "dense_otoc"]
