"""Classical noise models, error bounds and resource estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .exceptions import ConfigurationError
from .pauli import PauliString, PauliSum, spectral_norm_bound
from .spectral import SignalSeries
from .statevector import StateVector, dense_matrix, hamiltonian_eigensystem

WILCOX_CONSTANT = 2.31


@dataclass(frozen=True)
class NoiseModel:
    """Global depolarizing probability ``p`` per Trotter layer of length ``dt`` plus shot noise."""

    p: float = 0.0
    dt: float = 1.0
    n_shot: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p < 1:
            raise ConfigurationError(f"depolarizing probability must lie in [0, 1), got {self.p}")
        if not self.dt > 0:
            raise ConfigurationError("Trotter step must be positive")
        if self.n_shot is not None and self.n_shot <= 0:
            raise ConfigurationError("shot count must be positive")

    @property
    def gamma(self) -> float:
        return -math.log1p(-self.p) / self.dt


def task_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for Monte Carlo task ``index`` under a master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def depolarize_series(series: SignalSeries, model: NoiseModel) -> SignalSeries:
    """Multiply each sample by ``exp(-gamma |t|)``."""
    damping = np.exp(-model.gamma * np.abs(series.times))
    return replace(series, samples=series.samples * damping)


def smearing_function(omega, gamma: float, T: float):
    """``(1 - exp(-(gamma + i omega) T)) / (gamma + i omega)``, finite at ``gamma = omega = 0``."""
    if gamma < 0:
        raise ValueError("decay rate must be non-negative")
    z = gamma + 1j * np.asarray(omega, dtype=float)
    zt = z * T
    small = np.abs(zt) < 1e-8
    safe_z = np.where(small, 1.0, z)
    closed = -np.expm1(-zt) / safe_z
    series = T * (1 - zt / 2 + zt**2 / 6)
    out = np.where(small, series, closed)
    return out if out.ndim else complex(out)


def smearing_fwhm(gamma: float, T: float) -> float:
    """Full width at half maximum of ``Re F(omega)``, located numerically."""
    peak = smearing_function(0.0, gamma, T).real
    half = lambda w: smearing_function(w, gamma, T).real - peak / 2
    grid = np.linspace(0, 20 * max(gamma, 1.0 / T), 20001)
    vals = smearing_function(grid, gamma, T).real - peak / 2
    crossing = np.nonzero(vals < 0)[0]
    if not len(crossing):
        raise ValueError("no half-maximum crossing on the search grid")
    j = crossing[0]
    return 2 * optimize.brentq(half, grid[j - 1], grid[j], xtol=1e-12)


def shot_sample(term_expectations, n_shot: int | None, rng: np.random.Generator,
                coeffs=None) -> float:
    """Estimate ``sum_l c_l <P_l>`` from ``n_shot`` single-shot outcomes per Pauli term.

    Each term yields ``+1`` with probability ``(1 + <P_l>)/2``. ``n_shot=None``
    (or infinity) returns the exact value.
    """
    exp = np.atleast_1d(np.asarray(term_expectations, dtype=float))
    c = np.ones_like(exp) if coeffs is None else np.atleast_1d(np.asarray(coeffs, dtype=float))
    if n_shot is None or n_shot == math.inf:
        return float(c @ exp)
    if n_shot <= 0:
        raise ValueError("shot count must be positive")
    prob = np.clip((1 + exp) / 2, 0.0, 1.0)
    ups = rng.binomial(int(n_shot), prob)
    return float(c @ (2 * ups / n_shot - 1))


def combined_error_bound(n: int, n_plus: int, n_shot: float | None, eps_qite: float, dt: float,
                         p_order: int, h_norm: float, t_span: float, o_norm: float,
                         trotter_constant: float = 1.0) -> float:
    """``2^{n-1} ||O|| [1/sqrt(N) + n_+ eps + C t_span dt^p ||H||^{p+1}]``."""
    shot = 0.0 if n_shot is None or n_shot == math.inf else 1.0 / math.sqrt(n_shot)
    trotter = trotter_constant * t_span * dt**p_order * h_norm ** (p_order + 1)
    return 2 ** (n - 1) * o_norm * (shot + n_plus * eps_qite + trotter)


# -- bang-bang pulses ------------------------------------------------------------

@dataclass(frozen=True)
class Pulse:
    start: float
    tau: float
    op: PauliString


@dataclass
class BangBangSchedule:
    """Pulses ``Lambda O_j`` of length ``tau_j / Lambda`` added on top of an always-on ``H``."""

    hamiltonian: PauliSum
    lam: float
    pulses: list[Pulse] = field(default_factory=list)

    def __post_init__(self):
        if self.lam < 1:
            raise ConfigurationError("rescaling factor must be at least 1")
        end = -math.inf
        for p in self.pulses:
            if not p.op.is_hermitian():
                raise ConfigurationError(f"pulse operator {p.op} must be Hermitian")
            if p.start < end - 1e-12:
                raise ConfigurationError("pulses overlap or are not time ordered")
            end = p.start + self.duration(p)

    def duration(self, pulse: Pulse) -> float:
        return abs(pulse.tau) / self.lam

    def segments(self, t_end: float) -> list[tuple[float, PauliSum]]:
        """Piecewise-constant ``(length, generator)`` list covering ``[0, t_end]``."""
        out, now = [], 0.0
        h = self.hamiltonian
        for p in self.pulses:
            if p.start > now:
                out.append((p.start - now, h))
            sgn = 1.0 if p.tau >= 0 else -1.0
            kick = sgn * self.lam * PauliSum.from_string(p.op)
            out.append((self.duration(p), h + kick))
            now = p.start + self.duration(p)
        if t_end < now - 1e-12:
            raise ConfigurationError("schedule extends past t_end")
        if t_end > now:
            out.append((t_end - now, h))
        return out


def _exact_step(op: PauliSum, t: float, amps: np.ndarray) -> np.ndarray:
    evals, evecs = hamiltonian_eigensystem(op)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ amps))


def simulate_bangbang(schedule: BangBangSchedule, state: StateVector, t_end: float) -> StateVector:
    """Time-ordered evolution under ``H'(t)``; each constant segment is exponentiated exactly."""
    amps = state.amplitudes
    for length, gen in schedule.segments(t_end):
        amps = _exact_step(gen, length, amps)
    return StateVector(state.n_qubits, amps, state.norm_log)


def ideal_pulsed_evolution(schedule: BangBangSchedule, state: StateVector, t_end: float) -> StateVector:
    """The target: instantaneous ``exp(-i tau_j O_j)`` at each ``t_j`` interleaved with ``H``."""
    amps, now = state.amplitudes, 0.0
    h = schedule.hamiltonian
    for p in schedule.pulses:
        amps = _exact_step(h, p.start - now, amps)
        gate = PauliSum.from_string(p.op)
        amps = _exact_step(gate, p.tau, amps)
        now = p.start
    amps = _exact_step(h, t_end - now, amps)
    return StateVector(state.n_qubits, amps, state.norm_log)


def bangbang_error_bound(schedule: BangBangSchedule) -> float:
    """Leading-order bound ``sum_j 2.31 |tau_j| ||H|| / Lambda`` with ``||H||`` the coefficient 1-norm."""
    h_norm = spectral_norm_bound(schedule.hamiltonian)
    return sum(WILCOX_CONSTANT * abs(p.tau) * h_norm / schedule.lam for p in schedule.pulses)


def operator_norm(op: PauliSum) -> float:
    """Exact spectral norm from the dense matrix (small registers only)."""
    return float(np.linalg.norm(dense_matrix(op), 2))


# -- QITE resources ----------------------------------------------------------------

def resource_estimate(k: float, xi: float, tau: float, eps: float, d: int,
                      N: float) -> tuple[float, float, float]:
    """``(N_q, log_4 N_G, xi_threshold)`` with all hidden constants set to 1.

    ``N_q = k [2 xi (2 tau + ln(2/eps))]^d`` qubits in the QITE domain,
    ``log_4 N_G = N_q`` and ``xi_threshold = (ln N / (2 k d))^{1/d}``.
    """
    for name, val in (("k", k), ("xi", xi), ("eps", eps), ("d", d), ("N", N)):
        if val <= 0:
            raise ValueError(f"{name} must be positive")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    n_q = k * (2 * xi * (2 * tau + math.log(2 / eps))) ** d
    xi_thr = (math.log(N) / (2 * k * d)) ** (1 / d)
    return n_q, n_q, xi_thr


__all__ = [
    "NoiseModel", "task_rng", "depolarize_series", "smearing_function", "smearing_fwhm",
    "shot_sample", "combined_error_bound", "Pulse", "BangBangSchedule", "simulate_bangbang",
    "ideal_pulsed_evolution", "bangbang_error_bound", "operator_norm", "resource_estimate",
    "WILCOX_CONSTANT",
]
