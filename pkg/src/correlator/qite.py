"""Imaginary-time evolution of Pauli operators.

Four interchangeable realizations of the normalized map
``psi -> exp(-tau O) psi / ||exp(-tau O) psi||``:

* :func:`nonunitary_oracle` applies the non-unitary operator directly;
* :func:`analytic_single_qubit_qite` uses the closed-form ``R_Y`` angle for
  single-qubit generators on product states;
* :func:`qite_unitary` solves ``M a = V`` on a local domain each step;
* :func:`qite_projective` is the ``tau -> -/+ infinity`` limit.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import ConfigurationError, ProjectionError, StateError
from .pauli import PauliString, PauliSum
from .statevector import (
    StateVector,
    apply_pauli_exponential,
    hamiltonian_eigensystem,
    pauli_apply,
)

TAU_PLUS = 0.5 * math.log(1 + math.sqrt(2))
TAU_MINUS = math.pi / 4
MAX_DOMAIN_QUBITS = 6

QiteVariant = Literal["oracle", "analytic", "unitary", "projective"]
QITE_VARIANTS = ("oracle", "analytic", "unitary", "projective")


@dataclass(frozen=True)
class QiteConfig:
    """Settings of the linear-system QITE.

    ``steps`` splits the imaginary time into ``r`` slices of ``tau / r``;
    ``domain_radius`` grows the generator's support by that many qubits on
    each side (clipped to the register).
    """

    total_tau: float = TAU_PLUS
    steps: int = 50
    domain_radius: int = 0
    regularization: float = 1e-8

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError("QITE needs at least one step")
        if self.domain_radius < 0:
            raise ConfigurationError("domain radius must be non-negative")


def nonunitary_oracle(state: StateVector, op: PauliSum | PauliString, tau: float) -> StateVector:
    """Normalized ``exp(-tau O)|psi>`` computed without approximation."""
    if isinstance(op, PauliString):
        return apply_pauli_exponential(state, op, tau, "imaginary_time")
    if not op.is_hermitian():
        raise ValueError("imaginary-time generator must be Hermitian")
    if len(op) == 1:
        c, s = op.terms[0]
        p = PauliString(s, 1 if c.real >= 0 else -1)
        return apply_pauli_exponential(state, p, abs(c.real) * tau, "imaginary_time")
    evals, evecs = hamiltonian_eigensystem(op)
    out = evecs @ (np.exp(-tau * evals) * (evecs.conj().T @ state.amplitudes))
    nrm = float(np.linalg.norm(out))
    return StateVector(state.n_qubits, out / nrm, state.norm_log + math.log(nrm))


# -- closed-form single-qubit rotations --------------------------------------

def x_on_zero_angle(tau_eff: float) -> float:
    """``R_Y`` angle reproducing ``exp(-tau X)|0>``."""
    return -2.0 * math.atan(math.tanh(tau_eff))


def z_on_plus_angle(tau_eff: float) -> float:
    """``R_Y`` angle reproducing ``exp(-tau Z)|+>``."""
    return 2.0 * math.atan(math.exp(2.0 * tau_eff)) - math.pi / 2


def ssh_rotation_angles(k: float, L: int, tau: float) -> np.ndarray:
    """Per-site angles realizing ``exp(-tau sum_j cos(kj) X_j)`` on ``|0...0>``."""
    return np.array([x_on_zero_angle(tau * math.cos(k * j)) for j in range(L)])


def apply_ry(state: StateVector, site: int, theta: float) -> StateVector:
    """``exp(-i theta Y_site / 2)``."""
    p = PauliString.from_sites(state.n_qubits, {site: "Y"})
    return apply_pauli_exponential(state, p, theta / 2, "real_time")


def _site_expectation(state: StateVector, site: int, letter: str) -> float:
    p = PauliString.from_sites(state.n_qubits, {site: letter})
    return float(np.vdot(state.amplitudes, pauli_apply(state.amplitudes, p)).real)


def analytic_single_qubit_qite(state: StateVector, axis: Literal["x_on_zero", "z_on_plus"],
                               site: int, tau_eff: float) -> StateVector:
    """Imaginary-time step of ``X_site`` on ``|0>`` or ``Z_site`` on ``|+>`` as one rotation.

    Raises :class:`StateError` when the target qubit is not (within 1e-9) in
    the required single-qubit state, since the rotation is only exact there.
    """
    if axis == "x_on_zero":
        purity, theta = _site_expectation(state, site, "Z"), x_on_zero_angle(tau_eff)
    elif axis == "z_on_plus":
        purity, theta = _site_expectation(state, site, "X"), z_on_plus_angle(tau_eff)
    else:
        raise ValueError(f"unknown axis {axis!r}")
    if abs(purity - 1.0) > 1e-9:
        raise StateError(f"qubit {site} is not in the state required by {axis}")
    out = apply_ry(state, site, theta)
    # the rotation is norm preserving; record what exp(-tau O) would have discarded
    norm_sq = math.cosh(2 * tau_eff)
    return StateVector(out.n_qubits, out.amplitudes, state.norm_log + 0.5 * math.log(norm_sq))


def analytic_axis(state: StateVector, p: PauliString) -> tuple[str, int, float]:
    """Pick the closed-form rotation for a single-qubit ``+-X`` or ``+-Z`` generator."""
    if p.weight != 1 or not p.is_hermitian():
        raise StateError(f"analytic QITE needs a single-qubit Hermitian generator, got {p}")
    site = p.support[0]
    letter = p.letters[site]
    sign = p.phase.real
    if letter == "X" and abs(_site_expectation(state, site, "Z") - 1) <= 1e-9:
        return "x_on_zero", site, sign
    if letter == "Z" and abs(_site_expectation(state, site, "X") - 1) <= 1e-9:
        return "z_on_plus", site, sign
    raise StateError(f"no closed-form rotation for {p} on this state")


# -- linear-system QITE ------------------------------------------------------

def qite_domain(sigma: PauliString, radius: int) -> tuple[int, ...]:
    support = sigma.support or (0,)
    lo = max(0, min(support) - radius)
    hi = min(sigma.n_qubits - 1, max(support) + radius)
    return tuple(range(lo, hi + 1))


def domain_basis(n_qubits: int, domain: tuple[int, ...]) -> list[PauliString]:
    """All non-identity Pauli strings supported inside ``domain``, canonical order."""
    if len(domain) > MAX_DOMAIN_QUBITS:
        raise ConfigurationError(
            f"QITE domain of {len(domain)} qubits exceeds {MAX_DOMAIN_QUBITS}; "
            "use the projective or analytic variant")
    basis = []
    for letters in itertools.product("IXYZ", repeat=len(domain)):
        if set(letters) == {"I"}:
            continue
        basis.append(PauliString.from_sites(n_qubits, dict(zip(domain, letters))))
    return sorted(basis, key=lambda p: p.letters)


def qite_linear_system(state: StateVector, sigma: PauliString, basis: list[PauliString]):
    """``M_{l,l'} = Re<s_l s_l'>`` and ``V_l = Im<s_l sigma>``."""
    psi = state.amplitudes
    applied = [pauli_apply(psi, p) for p in basis]
    gram = np.array([[np.vdot(a, b) for b in applied] for a in applied])
    sigma_psi = pauli_apply(psi, sigma)
    rhs = np.array([np.vdot(a, sigma_psi) for a in applied])
    return gram.real, rhs.imag


def qite_step_unitary(state: StateVector, sigma: PauliString, dtau: float,
                      cfg: QiteConfig = QiteConfig()) -> tuple[StateVector, np.ndarray]:
    """One QITE slice: solve the regularized system and apply ``prod_l exp(-i dtau a_l s_l)``.

    Returns the new state and the coefficient vector ``a`` ordered like
    :func:`domain_basis`.
    """
    if not sigma.is_hermitian():
        raise ValueError("QITE generator must be a Hermitian Pauli string")
    basis = domain_basis(state.n_qubits, qite_domain(sigma, cfg.domain_radius))
    if dtau == 0:
        return state.copy(), np.zeros(len(basis))
    m, v = qite_linear_system(state, sigma, basis)
    reg = m + cfg.regularization * np.eye(len(basis))
    if np.linalg.cond(reg) > 1e12:
        warnings.warn("QITE linear system is ill-conditioned; using regularized solution",
                      RuntimeWarning, stacklevel=2)
    coeffs = np.linalg.lstsq(reg, v, rcond=None)[0]
    out = state
    for a, p in zip(coeffs, basis):
        if a != 0:
            out = apply_pauli_exponential(out, p, dtau * a, "real_time")
    return out, coeffs


def qite_unitary(state: StateVector, sigma: PauliString, tau: float,
                 cfg: QiteConfig = QiteConfig()) -> StateVector:
    """``cfg.steps`` slices of :func:`qite_step_unitary` covering imaginary time ``tau``."""
    dtau = tau / cfg.steps
    out = state
    for _ in range(cfg.steps):
        out, _ = qite_step_unitary(out, sigma, dtau, cfg)
    return out


# -- projective limit --------------------------------------------------------

def qite_projective(state: StateVector, sigma: PauliString, sign: int) -> tuple[StateVector, float]:
    """Project onto the ``sign`` eigenspace of ``sigma`` with ``(I + sign*sigma)/2``.

    ``sign=+1`` is the ``tau -> -infinity`` limit of imaginary-time
    evolution, ``sign=-1`` the ``tau -> +infinity`` limit.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    psi = state.amplitudes
    projected = 0.5 * (psi + sign * pauli_apply(psi, sigma))
    prob = float(np.vdot(projected, projected).real)
    if prob <= 1e-14:
        raise ProjectionError(f"projection onto sigma={sign:+d} has zero probability")
    out = StateVector(state.n_qubits, projected / math.sqrt(prob), state.norm_log)
    return out, prob


def apply_imaginary_gate(state: StateVector, p: PauliString, tau: float,
                         variant: QiteVariant = "oracle",
                         cfg: QiteConfig | None = None) -> StateVector:
    """Normalized ``exp(-tau P)`` through the chosen realization."""
    if variant == "oracle":
        return apply_pauli_exponential(state, p, tau, "imaginary_time")
    if variant == "analytic":
        axis, site, sign = analytic_axis(state, p)
        return analytic_single_qubit_qite(state, axis, site, sign * tau)
    if variant == "unitary":
        cfg = cfg or QiteConfig()
        canonical = PauliString(p.letters)
        return qite_unitary(state, canonical, p.phase.real * tau, cfg)
    if variant == "projective":
        if tau == 0:
            return state.copy()
        return qite_projective(state, p, -1 if tau > 0 else 1)[0]
    raise ConfigurationError(f"unknown QITE variant {variant!r}")


__all__ = [
    "TAU_PLUS", "TAU_MINUS", "QiteConfig", "QITE_VARIANTS", "nonunitary_oracle",
    "analytic_single_qubit_qite", "x_on_zero_angle", "z_on_plus_angle", "ssh_rotation_angles",
    "qite_step_unitary", "qite_unitary", "qite_projective", "apply_imaginary_gate",
    "qite_domain", "domain_basis",
]
