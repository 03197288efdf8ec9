import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from correlator.exceptions import DimensionError
from correlator.models import build_tim, hadron_operator
from correlator.pauli import (
    PauliString,
    PauliSum,
    anticommutator,
    commutator,
    hopping,
    multiply,
    sigma_minus,
    sigma_plus,
    single,
    spectral_norm_bound,
    sum_multiply,
)
from strategies import pauli_strings, pauli_sums


def test_single_site_products():
    assert multiply(PauliString("X"), PauliString("X")) == PauliString("I", 1)
    assert multiply(PauliString("X"), PauliString("Y")) == PauliString("Z", 1j)
    assert multiply(PauliString("ZI"), PauliString("XX")) == PauliString("YX", 1j)


def test_multiply_size_mismatch():
    with pytest.raises(DimensionError):
        multiply(PauliString("X"), PauliString("XX"))


def test_sum_examples():
    xz = PauliSum.from_terms(1, [(1, "X"), (1, "Z")])
    assert sum_multiply(xz, xz).allclose(PauliSum.identity(1, 2.0))
    x = single(1, 0, "X")
    assert commutator(x, x).is_zero()
    h = hadron_operator(0, 1)
    assert commutator(h, h).is_zero()
    assert np.allclose(h.to_matrix() @ h.to_matrix() - h.to_matrix() @ h.to_matrix(), 0)


def test_norm_bound_examples():
    assert spectral_norm_bound(single(1, 0, "Z")) == 1.0
    half = PauliSum.from_terms(1, [(0.5, "X"), (0.5, "Z")])
    assert spectral_norm_bound(half) == pytest.approx(1.0)
    assert np.linalg.norm(half.to_matrix(), 2) == pytest.approx(1 / np.sqrt(2))
    assert spectral_norm_bound(build_tim(4)) == pytest.approx(7.0)


def test_sigma_ladder_convention():
    sp = sigma_plus(1, 0).to_matrix()
    sm = sigma_minus(1, 0).to_matrix()
    assert np.allclose(sp, [[0, 1], [0, 0]])
    assert np.allclose(sm, sp.conj().T)
    # hopping is sigma+ sigma- + h.c. expanded into (XX + YY)/2
    hp = (sigma_plus(2, 0) * sigma_minus(2, 1) + sigma_minus(2, 0) * sigma_plus(2, 1))
    assert hp.allclose(hopping(2, 0, 1))
    assert hopping(2, 0, 1).allclose(PauliSum.from_terms(2, [(0.5, "XX"), (0.5, "YY")]))


def test_text_roundtrip():
    s = PauliSum.from_terms(3, [(0.25, "XIZ"), (-1.5j, "YYI"), (1 + 2j, "III")])
    assert PauliSum.from_text(s.to_text()).allclose(s)


def test_dust_is_dropped():
    s = PauliSum.from_terms(1, [(1.0, "X"), (-1.0 + 1e-16, "X")])
    assert s.is_zero()


@given(pauli_strings())
def test_square_is_phase_squared_identity(a):
    sq = multiply(a, a)
    assert set(sq.letters) == {"I"}
    assert sq.phase == a.phase**2


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(*[pauli_strings(n_qubits=n)] * 3)))
def test_multiply_associative_and_matches_matrices(abc):
    a, b, c = abc
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))
    assert np.allclose(multiply(a, b).to_matrix(), a.to_matrix() @ b.to_matrix())


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_sums(n_qubits=n), pauli_sums(n_qubits=n))))
def test_sum_multiply_matches_dense(ab):
    a, b = ab
    ma, mb = a.to_matrix(), b.to_matrix()
    assert np.allclose(sum_multiply(a, b).to_matrix(), ma @ mb, atol=1e-12)
    assert np.allclose(commutator(a, b).to_matrix(), ma @ mb - mb @ ma, atol=1e-12)
    assert np.allclose(anticommutator(a, b).to_matrix(), ma @ mb + mb @ ma, atol=1e-12)


@given(pauli_sums())
def test_hermiticity_matches_dense(a):
    # per-term and entrywise tolerances disagree near the cutoff, so keep clear of it
    worst = max((abs(c.imag) for c, _ in a.terms), default=0.0)
    assume(not 1e-13 < worst < 1e-6)
    m = a.to_matrix()
    assert a.is_hermitian() == np.allclose(m, m.conj().T, rtol=0, atol=1e-11)


@given(pauli_strings())
def test_string_hermiticity_follows_phase(a):
    m = a.to_matrix()
    if a.phase in (1, -1):
        assert np.allclose(m, m.conj().T)
    else:
        assert np.allclose(m, -m.conj().T)


@given(pauli_sums())
def test_canonicalize_idempotent(a):
    once = a.canonicalize()
    assert once.canonicalize() == once
    letters = [s for _, s in once.terms]
    assert letters == sorted(set(letters))


@given(pauli_sums(max_qubits=3))
def test_norm_bound_dominates(a):
    assert spectral_norm_bound(a) >= np.linalg.norm(a.to_matrix(), 2) - 1e-12
