import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from correlator.exceptions import ConfigurationError
from correlator.models import (
    LatticeMomentum,
    SchwingerParams,
    SSHParams,
    bare_vacuum,
    brickwork_groups,
    build_schwinger_truncated,
    build_ssh,
    build_tim,
    default_source_site,
    hadron_operator,
    momentum_hadron_correlator_spec,
    plus_state,
    reflection_operator,
    schwinger_electric_truncated,
    schwinger_kinetic_term,
    schwinger_mass_term,
    ssh_free_fermion_ground_energy,
)
from correlator.models import ssh_single_particle_matrix
from correlator.pauli import PauliSum, single
from correlator.statevector import dense_matrix, expectation, hamiltonian_eigensystem


def _coeff(op: PauliSum, letters: str) -> complex:
    return dict((s, c) for c, s in op.terms).get(letters, 0.0)


def test_schwinger_mass_and_kinetic_coefficients():
    h = build_schwinger_truncated(SchwingerParams(2, 0.5, 0.3))
    mass = schwinger_mass_term(2, 0.5)
    assert [_coeff(mass, s) for s in ("ZIII", "IZII", "IIZI", "IIIZ")] == [0.25, -0.25, 0.25, -0.25]
    assert _coeff(schwinger_kinetic_term(2), "XXII") == pytest.approx(0.25)
    assert _coeff(h, "XXII") == pytest.approx(0.25)
    assert _coeff(h, "IYYI") == pytest.approx(0.25)


def _literal_electric_L4(g: float) -> PauliSum:
    """Hand transcription of the truncated electric energy at L = 4 (8 qubits)."""
    zz = {
        (0, 1): 1.25, (2, 3): 0.25, (4, 5): 0.25, (6, 7): 1.25,
        (0, 2): 0.75, (1, 2): 0.75, (0, 3): 0.25, (1, 3): 0.25,
        (4, 6): 0.25, (4, 7): 0.25, (5, 6): 0.75, (5, 7): 0.75,
    }
    z = {0: 1.0, 1: 0.5, 2: 0.5, 5: -0.5, 6: -0.5, 7: -1.0}
    out = PauliSum.zero(8)
    for (a, b), c in zz.items():
        out = out + PauliSum.from_sites(8, {a: "Z", b: "Z"}, g**2 / 2 * c)
    for a, c in z.items():
        out = out + single(8, a, "Z", g**2 / 2 * c)
    return out


def test_electric_term_matches_literal_transcription():
    assert schwinger_electric_truncated(4, 0.3).allclose(_literal_electric_L4(0.3))


def test_odd_or_small_lattices_rejected():
    with pytest.raises(ConfigurationError):
        SchwingerParams(3)
    with pytest.raises(ConfigurationError):
        SSHParams(1)
    with pytest.raises(ConfigurationError):
        build_tim(1)
    with pytest.raises(ConfigurationError):
        LatticeMomentum(4, 6)


def test_tim_terms():
    h = build_tim(4)
    xx = [(c, s) for c, s in h.terms if s.count("X") == 2]
    zs = [(c, s) for c, s in h.terms if s.count("Z") == 1]
    assert len(xx) == 3 and len(zs) == 4 and len(h) == 7
    assert all(c == -1 for c, _ in h.terms)


@given(st.integers(2, 12))
def test_tim_term_count(L):
    assert len(build_tim(L)) == 2 * L - 1


def test_ssh_terms():
    h = build_ssh(SSHParams(2, 1.0, 0.8, -2.5))
    assert _coeff(h, "XX") == pytest.approx(-0.7)
    h12 = build_ssh(SSHParams(12))
    hops = [s for _, s in h12.terms if "X" in s or "Y" in s]
    zs = [s for _, s in h12.terms if set(s) <= {"I", "Z"}]
    assert len(hops) == 2 * 11 and len(zs) == 12


def test_ssh_ground_energy_matches_free_fermions():
    p = SSHParams(12, 1.0, 0.8, -2.5)
    evals = np.linalg.eigvalsh(dense_matrix(build_ssh(p)).real)
    assert evals[0] == pytest.approx(ssh_free_fermion_ground_energy(p), abs=1e-9)


def test_ssh_single_particle_gap():
    # middle gap of the one-particle spectrum: finite-size spacing at delta = 0, about 2 delta otherwise
    def middle_gap(delta):
        e = np.linalg.eigvalsh(ssh_single_particle_matrix(SSHParams(12, 1.0, delta, -2.5)))
        return e[6] - e[5]

    assert middle_gap(0.0) == pytest.approx(4 * math.sin(math.pi / 26) * math.sin(6.5 * math.pi / 13), abs=1e-9)
    assert middle_gap(0.8) > 1.6


def test_all_models_hermitian():
    for h in (build_schwinger_truncated(SchwingerParams(4)), build_ssh(SSHParams(6)), build_tim(5)):
        assert h.is_hermitian()


@pytest.mark.parametrize("L", [2, 4, 6])
def test_schwinger_reflection_symmetry(L):
    h = dense_matrix(build_schwinger_truncated(SchwingerParams(L, 0.5, 0.3)))
    r = reflection_operator(2 * L)
    assert np.abs(r @ h - h @ r).max() < 1e-12


def test_hadron_operator_and_weights():
    h = hadron_operator(0, 1)
    assert h.allclose(PauliSum.from_terms(2, [(-0.5j, "XX"), (-0.5j, "YY")]))
    m = h.to_matrix()
    assert np.allclose(m.conj().T, -m)
    assert all(w == 1 for _, w in momentum_hadron_correlator_spec(0.0, 6))
    weights = dict(momentum_hadron_correlator_spec(LatticeMomentum(1, 6), 6, 3))
    assert weights[0] == pytest.approx(-1)
    assert default_source_site(6) == 3
    with pytest.raises(ConfigurationError):
        hadron_operator(2, 2)


def test_initial_states():
    assert expectation(bare_vacuum(1), schwinger_mass_term(1, 0.5)) == pytest.approx(-0.5)
    assert expectation(bare_vacuum(3), schwinger_mass_term(3, 0.5)) == pytest.approx(-1.5)
    for j in range(4):
        assert expectation(plus_state(4), single(4, j, "X")) == pytest.approx(1.0)


def test_bare_vacuum_overlap_with_true_vacuum():
    h = build_schwinger_truncated(SchwingerParams(6, 0.5, 0.3))
    _, vecs = hamiltonian_eigensystem(h)
    overlap = abs(np.vdot(vecs[:, 0], bare_vacuum(6).amplitudes))
    assert overlap == pytest.approx(0.577, abs=5e-4)


@given(st.integers(2, 8))
def test_brickwork_groups_partition(L):
    h = build_tim(L)
    even, odd, diag = brickwork_groups(h)
    assert (even + odd + diag).allclose(h)
    assert all(set(s) <= {"I", "Z"} for _, s in diag.terms)
    # terms inside a layer act on disjoint pairs and commute
    for layer in (even, odd):
        starts = [min(i for i, c in enumerate(s) if c != "I") for _, s in layer.terms]
        assert len({q % 2 for q in starts}) <= 1
