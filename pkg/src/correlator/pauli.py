"""Pauli strings and complex-weighted Pauli sums.

Qubit 0 is the leftmost tensor factor, so ``"XZ"`` means ``X (x) Z`` and
qubit 0 maps to the most significant bit of a computational-basis index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .exceptions import DimensionError

PAULI_LETTERS = "IXYZ"
_PHASES = (1, 1j, -1, -1j)
_DROP_TOL = 1e-14

# (a, b) -> (power of i, letter) for the single-site product a*b
_SITE_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _phase_power(phase: complex) -> int:
    for k, p in enumerate(_PHASES):
        if abs(phase - p) < 1e-12:
            return k
    raise ValueError(f"phase must be a fourth root of unity, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis with a phase in {1, i, -1, -i}."""

    letters: str
    phase: complex = 1

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        object.__setattr__(self, "phase", _PHASES[_phase_power(self.phase)])

    @classmethod
    def from_sites(cls, n_qubits: int, sites: Mapping[int, str], phase: complex = 1) -> "PauliString":
        """Build a string from ``{qubit: letter}``; unlisted qubits are identity."""
        chars = ["I"] * n_qubits
        for q, letter in sites.items():
            if not 0 <= q < n_qubits:
                raise DimensionError(f"qubit {q} outside register of {n_qubits}")
            chars[q] = letter
        return cls("".join(chars), phase)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    @cached_property
    def masks(self) -> tuple[int, int, int]:
        """``(x_mask, z_mask, n_y)`` for the bit-level action on basis states."""
        n = self.n_qubits
        x = z = ny = 0
        for q, c in enumerate(self.letters):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                x |= bit
            if c in "ZY":
                z |= bit
            ny += c == "Y"
        return x, z, ny

    def to_matrix(self) -> np.ndarray:
        out = np.array([[self.phase]], dtype=complex)
        for c in self.letters:
            out = np.kron(out, _MATRICES[c])
        return out

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        if np.isscalar(other):
            return PauliSum.from_terms(self.n_qubits, [(complex(other) * self.phase, self.letters)])
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self.__mul__(other)
        return NotImplemented

    def __neg__(self):
        return PauliString(self.letters, -self.phase)

    def __str__(self):
        sign = {1: "+", 1j: "+i", -1: "-", -1j: "-i"}[self.phase]
        return f"{sign}{self.letters}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a * b`` including the accumulated phase."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot multiply {a.n_qubits}- and {b.n_qubits}-qubit strings")
    power = _phase_power(a.phase) + _phase_power(b.phase)
    letters = []
    for ca, cb in zip(a.letters, b.letters):
        k, c = _SITE_PRODUCT[ca, cb]
        power += k
        letters.append(c)
    return PauliString("".join(letters), _PHASES[power % 4])


@dataclass(frozen=True)
class PauliSum:
    """Canonical complex-weighted sum of phase-free Pauli strings.

    Terms are sorted lexicographically by letters, duplicates merged and
    coefficients with magnitude below 1e-14 dropped. Build instances with
    :meth:`from_terms` or the arithmetic operators rather than directly.
    """

    n_qubits: int
    terms: tuple[tuple[complex, str], ...] = field(default=())

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, str]]) -> "PauliSum":
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        acc: dict[str, complex] = {}
        for coeff, letters in terms:
            if isinstance(letters, PauliString):
                coeff, letters = coeff * letters.phase, letters.letters
            if len(letters) != n_qubits:
                raise DimensionError(f"term {letters!r} does not act on {n_qubits} qubits")
            if set(letters) - set(PAULI_LETTERS):
                raise ValueError(f"invalid Pauli letters in {letters!r}")
            acc[letters] = acc.get(letters, 0j) + complex(coeff)
        kept = tuple((c, s) for s, c in sorted(acc.items()) if abs(c) >= _DROP_TOL)
        return cls(n_qubits, kept)

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_terms(p.n_qubits, [(coeff * p.phase, p.letters)])

    @classmethod
    def from_sites(cls, n_qubits: int, sites: Mapping[int, str], coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.from_sites(n_qubits, sites), coeff)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_terms(n_qubits, [(coeff, "I" * n_qubits)])

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, ())

    def canonicalize(self) -> "PauliSum":
        return PauliSum.from_terms(self.n_qubits, self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=complex)

    def pauli_strings(self) -> list[PauliString]:
        return [PauliString(s) for _, s in self.terms]

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= atol for c, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, tuple((c.conjugate(), s) for c, s in self.terms))

    def real(self) -> "PauliSum":
        """Hermitian part ``(A + A^dagger) / 2``."""
        return PauliSum.from_terms(self.n_qubits, [(c.real, s) for c, s in self.terms])

    def imag(self) -> "PauliSum":
        """``B`` such that ``A = real(A) + i B`` with ``B`` Hermitian."""
        return PauliSum.from_terms(self.n_qubits, [(c.imag, s) for c, s in self.terms])

    def to_matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for c, s in self.terms:
            out += c * PauliString(s).to_matrix()
        return out

    def spectral_norm_bound(self) -> float:
        return spectral_norm_bound(self)

    def _coerce(self, other) -> "PauliSum":
        if isinstance(other, PauliSum):
            out = other
        elif isinstance(other, PauliString):
            out = PauliSum.from_string(other)
        elif np.isscalar(other):
            return PauliSum.identity(self.n_qubits, other)
        else:
            raise TypeError(f"cannot combine PauliSum with {type(other).__name__}")
        if out.n_qubits != self.n_qubits:
            raise DimensionError(f"{self.n_qubits}- vs {out.n_qubits}-qubit operators")
        return out

    def __add__(self, other):
        other = self._coerce(other)
        return PauliSum.from_terms(self.n_qubits, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n_qubits, tuple((-c, s) for c, s in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return PauliSum.from_terms(self.n_qubits, [(complex(other) * c, s) for c, s in self.terms])
        return sum_multiply(self, self._coerce(other))

    def __rmul__(self, other):
        if np.isscalar(other):
            return self.__mul__(other)
        return sum_multiply(self._coerce(other), self)

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_qubits, self.terms))

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for c, _ in diff.terms)

    def to_text(self) -> str:
        """One ``coeff * LETTERS`` line per term, in canonical order."""
        return "\n".join(f"{_format_coeff(c)} * {s}" for c, s in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        terms = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                coeff, letters = line.rsplit("*", 1)
                terms.append((complex(coeff.strip().replace(" ", "")), letters.strip()))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse Pauli term {line!r}") from exc
        if not terms:
            raise ValueError("no Pauli terms found")
        return cls.from_terms(len(terms[0][1]), terms)

    def __str__(self):
        return self.to_text() or "0"


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+.17g}j)"


def sum_multiply(a: PauliSum, b: PauliSum) -> PauliSum:
    """Operator product ``a @ b`` with merged, canonically ordered terms."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits}- vs {b.n_qubits}-qubit operators")
    terms = []
    for ca, sa in a.terms:
        pa = PauliString(sa)
        for cb, sb in b.terms:
            p = multiply(pa, PauliString(sb))
            terms.append((ca * cb * p.phase, p.letters))
    return PauliSum.from_terms(a.n_qubits, terms)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return sum_multiply(a, b) - sum_multiply(b, a)


def anticommutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return sum_multiply(a, b) + sum_multiply(b, a)


def spectral_norm_bound(a: PauliSum) -> float:
    """Triangle-inequality bound ``sum |c_k|`` on the operator norm."""
    return float(sum(abs(c) for c, _ in a.terms))


# -- Jordan-Wigner style helpers -------------------------------------------

def single(n_qubits: int, q: int, letter: str, coeff: complex = 1.0) -> PauliSum:
    return PauliSum.from_sites(n_qubits, {q: letter}, coeff)


def sigma_plus(n_qubits: int, q: int) -> PauliSum:
    """``(X + iY)/2`` on qubit ``q``."""
    return single(n_qubits, q, "X", 0.5) + single(n_qubits, q, "Y", 0.5j)


def sigma_minus(n_qubits: int, q: int) -> PauliSum:
    """``(X - iY)/2`` on qubit ``q``."""
    return single(n_qubits, q, "X", 0.5) + single(n_qubits, q, "Y", -0.5j)


def hopping(n_qubits: int, p: int, q: int) -> PauliSum:
    """``sigma+_p sigma-_q + h.c.``, which expands to ``(X_p X_q + Y_p Y_q)/2``."""
    hop = sigma_plus(n_qubits, p) * sigma_minus(n_qubits, q)
    return hop + hop.dagger()
