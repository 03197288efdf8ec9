"""Nested (anti)commutators from shifted circuit expectations.

A bracket ``c_b = <phi|[[...[O_{n-1}(t_{n-1}), O_{n-2}(t_{n-2})]_{b_{n-2}}, ...], O_0(t_0)]_{b_0}|phi>``
is recovered from ``2^{n-1}`` runs of a circuit that interleaves time
evolution with the gates ``exp(-i tau O_j)`` (``b_j = -``) and normalized
``exp(-tau O_j)`` (``b_j = +``), without ancillas. The normalization of the
imaginary-time gates is undone by the correction factor ``Corr``.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .exceptions import ConfigurationError, DimensionError
from .noise import shot_sample
from .pauli import PauliString, PauliSum
from .qite import QITE_VARIANTS, TAU_MINUS, TAU_PLUS, QiteConfig, apply_imaginary_gate
from .statevector import (
    EvolutionBackend,
    StateVector,
    apply_pauli,
    apply_pauli_exponential,
    evolve,
    pauli_expectations,
)

Frame = Callable[[StateVector], StateVector]
_BRACKET_SIGNS = ("+", "-")


def _as_sum(op: PauliSum | PauliString) -> PauliSum:
    return PauliSum.from_string(op) if isinstance(op, PauliString) else op


@dataclass
class Measurement:
    """How expectation values are read out: exactly, or from ``shots`` samples per Pauli term."""

    shots: int | None = None
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.shots is not None:
            if self.shots <= 0:
                raise ConfigurationError("shot count must be positive")
            if self.rng is None:
                self.rng = np.random.default_rng()

    def __call__(self, state: StateVector, obs: PauliSum) -> float:
        strings = [s for _, s in obs.terms]
        coeffs = np.array([c.real for c, _ in obs.terms])
        exact = pauli_expectations(state, strings)
        if self.shots is None:
            return float(coeffs @ exact)
        return shot_sample(exact, self.shots, self.rng, coeffs)


@dataclass
class BracketSpec:
    """One nested bracket ``c_b`` and everything needed to run its circuits.

    ``operators[:-1]`` are Hermitian Pauli strings, the last one is a
    Hermitian Pauli sum. ``frame`` optionally transforms the state right
    before the final measurement (used for composite observables).
    ``correction_measurement`` reads the expectations entering ``Corr``;
    it defaults to ``measurement``.
    """

    operators: list
    times: list[float]
    signs: tuple[str, ...]
    initial_state: StateVector
    backend: EvolutionBackend
    tau_plus: float = TAU_PLUS
    tau_minus: float = TAU_MINUS
    qite_variant: str = "oracle"
    qite_config: QiteConfig | None = None
    frame: Frame | None = None
    measurement: Measurement = field(default_factory=Measurement)
    correction_measurement: Measurement | None = None

    def __post_init__(self):
        self.signs = tuple(self.signs)
        self.times = [float(t) for t in self.times]
        self.operators = list(self.operators)
        n = len(self.operators)
        if n < 1 or len(self.times) != n or len(self.signs) != n - 1:
            raise ConfigurationError(
                f"bracket needs n operators, n times and n-1 signs; got "
                f"{n}, {len(self.times)}, {len(self.signs)}")
        for s in self.signs:
            if s not in _BRACKET_SIGNS:
                raise ConfigurationError(f"bracket sign must be '+' or '-', got {s!r}")
        for op in self.operators[:-1]:
            if not isinstance(op, PauliString) or not op.is_hermitian():
                raise ConfigurationError(f"gate operator {op} must be a Hermitian Pauli string")
        self.operators[-1] = _as_sum(self.operators[-1])
        if not self.operators[-1].is_hermitian():
            raise ConfigurationError("final observable must be Hermitian")
        nq = self.initial_state.n_qubits
        if any(op.n_qubits != nq for op in self.operators) or self.backend.n_qubits != nq:
            raise DimensionError("operators, state and Hamiltonian act on different registers")
        if abs(math.sinh(2 * self.tau_plus)) < 1e-12 or abs(math.sin(2 * self.tau_minus)) < 1e-12:
            raise ConfigurationError("shift times make sinh(2 tau+) or sin(2 tau-) vanish")
        if self.qite_variant not in QITE_VARIANTS:
            raise ConfigurationError(f"unknown QITE variant {self.qite_variant!r}")

    @property
    def n(self) -> int:
        return len(self.operators)

    @property
    def n_plus(self) -> int:
        return self.signs.count("+")

    @property
    def n_minus(self) -> int:
        return self.signs.count("-")

    @property
    def last_plus(self) -> int | None:
        """Index of the imaginary-time gate closest to the observable."""
        plus = [j for j, s in enumerate(self.signs) if s == "+"]
        return plus[-1] if plus else None

    def shift(self, sign: str) -> float:
        return self.tau_plus if sign == "+" else self.tau_minus


@dataclass(frozen=True)
class ShiftAssignment:
    """Binary choice ``xi`` of shift directions, giving ``tau_j = (-1)^{xi_j} tau_{b_j}``."""

    xi: tuple[int, ...]

    @property
    def weight(self) -> int:
        return sum(self.xi)

    @property
    def parity(self) -> int:
        return -1 if self.weight % 2 else 1

    def taus(self, spec: BracketSpec) -> tuple[float, ...]:
        return tuple((-1) ** x * spec.shift(b) for x, b in zip(self.xi, spec.signs))


def shift_assignments(n_gates: int) -> Iterator[ShiftAssignment]:
    for xi in itertools.product((0, 1), repeat=n_gates):
        yield ShiftAssignment(xi)


# -- circuits ----------------------------------------------------------------

def _apply_gate(spec: BracketSpec, state: StateVector, j: int, tau: float) -> StateVector:
    op = spec.operators[j]
    if spec.signs[j] == "-":
        return apply_pauli_exponential(state, op, tau, "real_time")
    return apply_imaginary_gate(state, op, tau, spec.qite_variant, spec.qite_config)


def _prefix_state(spec: BracketSpec, taus: Sequence[float], count: int) -> tuple[StateVector, float]:
    """State after the first ``count`` gates, and the time it sits at."""
    state, now = spec.initial_state, 0.0
    for j in range(count):
        state = evolve(state, spec.backend, now, spec.times[j])
        now = spec.times[j]
        state = _apply_gate(spec, state, j, taus[j])
    return state, now


def _gate_expectation(spec: BracketSpec, taus: Sequence[float], j: int) -> float:
    """``<O_j(t_j)>`` after the first ``j`` gates, the building block of ``Corr``."""
    state, now = _prefix_state(spec, taus, j)
    state = evolve(state, spec.backend, now, spec.times[j])
    measure = spec.correction_measurement or spec.measurement
    return measure(state, _as_sum(spec.operators[j]))


def circuit_expectation(spec: BracketSpec, taus: Sequence[float]) -> float:
    """Run the full circuit with gate parameters ``taus`` and measure ``O_{n-1}``."""
    if len(taus) != spec.n - 1:
        raise ConfigurationError(f"expected {spec.n - 1} gate parameters, got {len(taus)}")
    state, now = _prefix_state(spec, taus, spec.n - 1)
    state = evolve(state, spec.backend, now, spec.times[-1])
    if spec.frame is not None:
        state = spec.frame(state)
    return spec.measurement(state, spec.operators[-1])


def correction_factor(spec: BracketSpec, i: int, tau_prefix: Sequence[float],
                      _cache: dict | None = None) -> float:
    """``Corr(tau_0, ..., tau_i)``: squared norm of the unnormalized state after gate ``i``.

    Each imaginary-time gate ``j`` multiplies the norm by
    ``cosh 2tau_j - sinh 2tau_j <O_j(t_j)>``, the expectation taken in the
    circuit truncated before gate ``j``. The recursion walks down through
    the earlier ``+`` gates; real-time gates leave the norm alone.
    """
    if not 0 <= i < spec.n - 1 or spec.signs[i] != "+":
        raise ConfigurationError(f"correction factor needs a '+' gate index, got {i}")
    if len(tau_prefix) < i + 1:
        raise ConfigurationError("tau prefix shorter than the gate index")
    if spec.qite_variant == "projective":
        raise ConfigurationError("the projective variant has no finite correction factor")
    factor = 1.0
    depth = 0
    for j in range(i, -1, -1):
        if spec.signs[j] != "+":
            continue
        depth += 1
        if depth > spec.n:
            raise RuntimeError("correction factor recursion exceeded the bracket order")
        tau = tau_prefix[j]
        m = _cached_gate_expectation(spec, tau_prefix, j, _cache)
        factor *= math.cosh(2 * tau) - math.sinh(2 * tau) * m
    return factor


def _cached_gate_expectation(spec, taus, j, cache):
    if cache is None:
        return _gate_expectation(spec, taus, j)
    key = (j, tuple(taus[:j]))
    if key not in cache:
        cache[key] = _gate_expectation(spec, taus, j)
    return cache[key]


def _projective_weight(spec: BracketSpec, taus, cache) -> float:
    # tau_+ -> infinity limit of Corr / sinh(2 tau_+)^{n_+}
    weight = 1.0
    for j, s in enumerate(spec.signs):
        if s == "+":
            m = _cached_gate_expectation(spec, taus, j, cache)
            weight *= 1.0 - math.copysign(1.0, taus[j]) * m
    return weight


def nested_bracket(spec: BracketSpec) -> complex:
    """``c_b`` from the shift rule ``(-1/sinh 2tau+)^{n+} (i/sin 2tau-)^{n-} sum_xi (-1)^|xi| Corr <O>``.

    With the projective variant the imaginary shifts are taken to infinity
    and the ``sinh`` prefactors are absorbed into the limiting correction
    weights.
    """
    if spec.n == 1:
        return complex(circuit_expectation(spec, ()))
    projective = spec.qite_variant == "projective"
    i = spec.last_plus
    cache: dict = {}
    total = 0.0
    for shift in shift_assignments(spec.n - 1):
        taus = shift.taus(spec)
        value = circuit_expectation(spec, taus)
        if i is not None:
            if projective:
                value *= _projective_weight(spec, taus, cache)
            else:
                value *= correction_factor(spec, i, taus, cache)
        total += shift.parity * value
    if projective:
        plus_prefactor = (-1.0) ** spec.n_plus
    else:
        plus_prefactor = (-1.0 / math.sinh(2 * spec.tau_plus)) ** spec.n_plus
    minus_prefactor = (1j / math.sin(2 * spec.tau_minus)) ** spec.n_minus
    return complex(plus_prefactor * minus_prefactor * total)


# -- multilinear assembly ----------------------------------------------------

def _identity_string(n_qubits: int) -> str:
    return "I" * n_qubits


def bracket(operators: Sequence[PauliSum | PauliString], times: Sequence[float], signs: Sequence[str],
            state: StateVector, backend: EvolutionBackend, **options) -> complex:
    """Nested bracket of general Pauli sums by expansion over Pauli terms.

    Gate operators are split into Pauli strings and the final observable
    into Hermitian and anti-Hermitian parts; identity gate terms are
    resolved analytically (``[A, I]_- = 0``, ``[A, I]_+ = 2A``).
    ``options`` are forwarded to :class:`BracketSpec`.
    """
    if not len(operators) == len(times) == len(signs) + 1:
        raise ConfigurationError("need n operators, n times and n-1 signs")
    ops = [_as_sum(op) for op in operators]
    nq = state.n_qubits
    final = ops[-1]
    parts = [(1.0, final.real()), (1j, final.imag())]
    parts = [(w, p) for w, p in parts if not p.is_zero()]
    identity = _identity_string(nq)
    total = 0j
    for combo in itertools.product(*(op.terms for op in ops[:-1])):
        coeff = complex(np.prod([c for c, _ in combo])) if combo else 1.0
        kept_ops, kept_times, kept_signs = [], [], []
        for (c, s), t, b in zip(combo, times[:-1], signs):
            if s == identity:
                if b == "-":
                    coeff = 0.0
                    break
                coeff *= 2.0
                continue
            kept_ops.append(PauliString(s))
            kept_times.append(t)
            kept_signs.append(b)
        if coeff == 0:
            continue
        for w, part in parts:
            spec = BracketSpec(kept_ops + [part], kept_times + [times[-1]], tuple(kept_signs),
                               state, backend, **options)
            total += coeff * w * nested_bracket(spec)
    return complex(total)


def n_time_correlation(operators: Sequence[PauliSum | PauliString], times: Sequence[float],
                       state: StateVector, backend: EvolutionBackend, **options) -> complex:
    """``<phi|O_{n-1}(t_{n-1}) ... O_0(t_0)|phi>`` as ``2^{-(n-1)} sum_b c_b``."""
    n = len(operators)
    if n < 1 or len(times) != n:
        raise ConfigurationError("need one time per operator")
    total = 0j
    for signs in itertools.product(_BRACKET_SIGNS, repeat=n - 1):
        total += bracket(operators, times, signs, state, backend, **options)
    return complex(total / 2 ** (n - 1))


# -- OTOC ----------------------------------------------------------------------

def otoc_frame(w: PauliString, t: float, backend: EvolutionBackend) -> Frame:
    """``psi -> U(t)^dag W U(t) psi``; measuring ``V`` afterwards gives ``W(t) V W(t)``."""

    def frame(state: StateVector) -> StateVector:
        moved = evolve(state, backend, 0.0, t)
        return evolve(apply_pauli(moved, w), backend, t, 0.0)

    return frame


def otoc(w: PauliString, v: PauliString, t: float, state: StateVector,
         backend: EvolutionBackend, **options) -> complex:
    """``F(t) = <phi|W(t) V W(t) V|phi>`` from one anticommutator and one commutator.

    ``Re F = <[W(t)VW(t), V]_+>/2`` and ``Im F = -i<[W(t)VW(t), V]_->/2``, both
    with ``V`` as the gate at time zero.
    """
    for p in (w, v):
        if not p.is_hermitian():
            raise ConfigurationError(f"OTOC operator {p} must be Hermitian")
    frame = otoc_frame(w, t, backend)
    final = _as_sum(v)
    anti = nested_bracket(BracketSpec([v, final], [0.0, 0.0], ("+",), state, backend,
                                      frame=frame, **options))
    comm = nested_bracket(BracketSpec([v, final], [0.0, 0.0], ("-",), state, backend,
                                      frame=frame, **options))
    return complex(anti.real / 2, (-1j * comm).real / 2)


def otoc_series(w: PauliString, v: PauliString, times: Sequence[float], state: StateVector,
                backend: EvolutionBackend, **options) -> np.ndarray:
    return np.array([otoc(w, v, t, state, backend, **options) for t in times])


# -- time series -----------------------------------------------------------------

def two_time_bracket_series(source: PauliSum | PauliString, observables: Sequence[PauliSum],
                            times: Sequence[float], sign: str, state: StateVector,
                            backend: EvolutionBackend, t0: float = 0.0,
                            tau_plus: float = TAU_PLUS, tau_minus: float = TAU_MINUS,
                            qite_variant: str = "oracle", qite_config: QiteConfig | None = None,
                            measurement: Measurement | None = None) -> np.ndarray:
    """``<[O_a(t), source(t0)]_sign>`` for every observable ``a`` and time ``t``.

    Same shift rule as :func:`nested_bracket` with ``n = 2``, but each
    shifted circuit is evolved once through the sorted time grid and all
    observables are read at every stop. Returns shape ``(len(observables), len(times))``.
    """
    if sign not in _BRACKET_SIGNS:
        raise ConfigurationError(f"bracket sign must be '+' or '-', got {sign!r}")
    if qite_variant not in QITE_VARIANTS:
        raise ConfigurationError(f"unknown QITE variant {qite_variant!r}")
    measure = measurement or Measurement()
    source = _as_sum(source)
    obs_parts = [[(1.0, o.real()), (1j, o.imag())] for o in map(_as_sum, observables)]
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    out = np.zeros((len(observables), len(times)), dtype=complex)
    identity = _identity_string(state.n_qubits)
    projective = qite_variant == "projective"
    shift = tau_plus if sign == "+" else tau_minus
    if sign == "+":
        prefactor = -1.0 if projective else -1.0 / math.sinh(2 * tau_plus)
    else:
        prefactor = 1j / math.sin(2 * tau_minus)

    def sweep(start: StateVector, weight: complex):
        current, now = start, t0
        for idx in order:
            current = evolve(current, backend, now, times[idx])
            now = times[idx]
            for a, parts in enumerate(obs_parts):
                val = sum(w * measure(current, p) for w, p in parts if not p.is_zero())
                out[a, idx] += weight * val

    at_t0 = evolve(state, backend, 0.0, t0)
    for c, s in source.terms:
        if s == identity:
            if sign == "+":
                sweep(at_t0, 2.0 * c)
            continue
        p = PauliString(s)
        m = measure(at_t0, _as_sum(p)) if sign == "+" else 0.0
        for xi in (0, 1):
            tau = (-1) ** xi * shift
            if sign == "+":
                gated = apply_imaginary_gate(at_t0, p, tau, qite_variant, qite_config)
                corr = (1 - math.copysign(1, tau) * m) if projective else \
                    math.cosh(2 * tau) - math.sinh(2 * tau) * m
            else:
                gated = apply_pauli_exponential(at_t0, p, tau, "real_time")
                corr = 1.0
            sweep(gated, c * prefactor * (-1) ** xi * corr)
    return out


def write_series_csv(path: str | Path, times: Sequence[float], values: Sequence[complex]) -> Path:
    """Write ``t,re,im`` rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re", "im"])
        for t, v in zip(times, values):
            writer.writerow([repr(float(t)), repr(float(np.real(v))), repr(float(np.imag(v)))])
    return path


def read_series_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return t, v


__all__ = [
    "BracketSpec", "ShiftAssignment", "Measurement", "shift_assignments",
    "circuit_expectation", "correction_factor", "nested_bracket", "bracket",
    "n_time_correlation", "otoc", "otoc_series", "otoc_frame", "two_time_bracket_series",
    "write_series_csv", "read_series_csv",
]
