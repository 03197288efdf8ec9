import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from correlator.exceptions import ConfigurationError
from correlator.models import build_tim
from correlator.noise import (
    BangBangSchedule,
    NoiseModel,
    Pulse,
    bangbang_error_bound,
    combined_error_bound,
    depolarize_series,
    ideal_pulsed_evolution,
    resource_estimate,
    shot_sample,
    simulate_bangbang,
    smearing_function,
    smearing_fwhm,
    task_rng,
)
from correlator.pauli import PauliString, PauliSum
from correlator.qite import TAU_PLUS
from correlator.spectral import SignalSeries, dft, double_signal, find_peaks, frequency_resolution
from correlator.statevector import random_state


def test_decay_rate():
    assert NoiseModel(0.01, 0.2).gamma == pytest.approx(0.05025167926750725, rel=1e-14)
    assert NoiseModel(0.0, 0.2).gamma == 0.0


def test_noise_model_validation():
    for kwargs in ({"p": 1.0}, {"p": -0.1}, {"dt": 0.0}, {"n_shot": 0}):
        with pytest.raises(ConfigurationError):
            NoiseModel(**kwargs)


def test_zero_noise_leaves_series_unchanged():
    s = SignalSeries(-1.0, 0.1, np.random.default_rng(0).normal(size=21))
    assert np.array_equal(depolarize_series(s, NoiseModel(0.0, 0.1)).samples, s.samples)


def test_negative_times_damped_symmetrically():
    s = SignalSeries(-1.0, 0.5, np.ones(5))
    out = depolarize_series(s, NoiseModel(0.1, 0.5)).samples.real
    assert np.allclose(out, out[::-1])
    assert out[2] == 1.0


def test_damped_constant_matches_smearing_function():
    gamma, dt, m = 0.5, 1e-3, 10_000
    series = depolarize_series(SignalSeries(0.0, dt, np.ones(m)), NoiseModel(1 - math.exp(-gamma * dt), dt))
    spec = dft(series)
    z = gamma + 1j * spec.omegas
    # discrete geometric sum, exact for the sampled signal
    geometric = dt * -np.expm1(-z * m * dt) / -np.expm1(-z * dt)
    assert np.allclose(spec.values, geometric, atol=1e-10)
    # and within the rectangle-rule error of the continuum profile
    near = np.abs(spec.omegas) < 20
    ref = smearing_function(spec.omegas[near], gamma, m * dt)
    assert np.max(np.abs(spec.values[near] - ref)) < 2e-2


def test_smearing_examples():
    assert smearing_function(0.0, 1.0, 1e6) == pytest.approx(1.0)
    assert smearing_function(0.0, 0.0, 10.0) == pytest.approx(10.0)
    assert smearing_fwhm(5.0, 1e3) == pytest.approx(10.0, rel=0.01)
    with pytest.raises(ValueError):
        smearing_function(0.0, -1.0, 1.0)


@given(st.floats(0.0, 5.0), st.floats(-10, 10), st.floats(0.1, 50))
def test_smearing_matches_quadrature(gamma, omega, T):
    re = integrate.quad(lambda t: math.exp(-gamma * t) * math.cos(omega * t), 0, T, limit=400)[0]
    im = integrate.quad(lambda t: -math.exp(-gamma * t) * math.sin(omega * t), 0, T, limit=400)[0]
    assert abs(smearing_function(omega, gamma, T) - complex(re, im)) < 1e-8


def test_shot_sample_examples():
    rng = np.random.default_rng(0)
    assert shot_sample([1.0], 400, rng) == 1.0
    assert shot_sample([0.3, -0.2], None, rng, [2.0, 1.0]) == pytest.approx(0.4)
    assert shot_sample([0.3], math.inf, rng) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        shot_sample([0.3], 0, rng)


def test_shot_noise_standard_deviation():
    draws = np.array([shot_sample([0.0], 400, task_rng(1, i)) for i in range(10_000)])
    assert draws.std() == pytest.approx(0.05, rel=0.05)


def test_shot_sample_unbiased():
    rng = np.random.default_rng(2)
    truth = np.array([0.4, -0.7])
    coeffs = np.array([0.5, 1.5])
    draws = np.array([shot_sample(truth, 50, rng, coeffs) for _ in range(100_000)])
    se = draws.std() / math.sqrt(len(draws))
    assert abs(draws.mean() - coeffs @ truth) < 3 * se


def test_task_rng_streams():
    a = task_rng(5, 3).normal(size=4)
    assert np.array_equal(a, task_rng(5, 3).normal(size=4))
    assert not np.array_equal(a, task_rng(5, 4).normal(size=4))
    assert not np.array_equal(a, task_rng(6, 3).normal(size=4))


def test_combined_bound_examples():
    assert combined_error_bound(3, 1, None, 0.0, 0.0, 2, 5.0, 4.0, 1.0) == 0.0
    assert combined_error_bound(2, 1, 400, 0.0, 0.0, 1, 3.0, 2.0, 1.0) == pytest.approx(0.1)


@given(st.integers(1, 5), st.integers(0, 4), st.floats(1, 1e6), st.floats(0, 1), st.floats(0, 0.5),
       st.sampled_from([1, 2]), st.floats(0, 10), st.floats(0, 10), st.floats(0, 5),
       st.sampled_from([0, 1, 2, 3, 4, 6, 7, 8]), st.floats(1.0, 2.0))
def test_combined_bound_monotone(n, n_plus, n_shot, eps, dt, p, h, span, o_norm, which, factor):
    # the Trotter order is excluded: dt^p shrinks with p whenever dt ||H|| < 1
    args = [n, n_plus, n_shot, eps, dt, p, h, span, o_norm]
    base = combined_error_bound(*args)
    bumped = list(args)
    if which == 2:
        bumped[2] = n_shot / factor  # fewer shots
    elif which in (0, 1):
        bumped[which] += 1
    else:
        bumped[which] *= factor
    assert combined_error_bound(*bumped) >= base - 1e-12 * max(1.0, base)


# -- spectral consequences of damping ----------------------------------------------

def _two_mode(e1, e2, gamma, T=200.0, dt=0.05):
    t = np.arange(0, T, dt)
    s = SignalSeries(0.0, dt, np.exp(-1j * e1 * t) + np.exp(-1j * e2 * t))
    return depolarize_series(s, NoiseModel(1 - math.exp(-gamma * dt), dt))


def test_damping_does_not_move_peaks():
    clean = dft(_two_mode(1.0, 2.5, 0.0))
    res = frequency_resolution(_two_mode(1.0, 2.5, 0.0))
    noisy = dft(_two_mode(1.0, 2.5, res / 5))
    pos = lambda s: sorted(w for w, _ in find_peaks(s, 0.5))
    assert np.allclose(pos(clean), pos(noisy), atol=res / 2)


def test_mode_distinguishability():
    # real Lorentzians of half width gamma from symmetrically doubled damped cosines
    gamma, dt = 0.2, 0.05
    t = np.arange(0, 200.0, dt)

    def count(sep):
        series = SignalSeries(0.0, dt, np.cos(1.0 * t) + np.cos((1.0 + sep) * t))
        doubled = depolarize_series(double_signal(series, "symmetric"), NoiseModel(1 - math.exp(-gamma * dt), dt))
        return len(find_peaks(dft(doubled).positive(), 0.5))

    assert count(6 * gamma) == 2
    assert count(gamma) == 1


# -- bang-bang ---------------------------------------------------------------------

def test_bangbang_bound_examples():
    h = build_tim(4)
    sched = BangBangSchedule(h, 100.0, [Pulse(0.5, math.pi / 4, PauliString("ZIII"))])
    assert bangbang_error_bound(sched) == pytest.approx(2.31 * (math.pi / 4) * 7 / 100, rel=1e-14)
    assert bangbang_error_bound(sched) == pytest.approx(0.12699, abs=1e-5)
    big = BangBangSchedule(h, 1e12, [Pulse(0.5, math.pi / 4, PauliString("ZIII"))])
    assert bangbang_error_bound(big) < 1e-10


def test_bangbang_rejects_overlap_and_small_lambda():
    h = build_tim(2)
    with pytest.raises(ConfigurationError):
        BangBangSchedule(h, 2.0, [Pulse(0.0, 1.0, PauliString("ZI")), Pulse(0.2, 1.0, PauliString("IZ"))])
    with pytest.raises(ConfigurationError):
        BangBangSchedule(h, 0.5)
    with pytest.raises(ConfigurationError):
        BangBangSchedule(h, 2.0, [Pulse(0.0, 1.0, PauliString("ZI", 1j))])


def _schedule(lam):
    h = PauliSum.from_terms(2, [(-1.0, "XX"), (-1.0, "ZI"), (-1.0, "IZ")])
    return BangBangSchedule(h, lam, [Pulse(0.4, math.pi / 4, PauliString("XI"))])


def _bangbang_error(lam):
    sched = _schedule(lam)
    state = random_state(2, np.random.default_rng(3))
    got = simulate_bangbang(sched, state, 1.5)
    ref = ideal_pulsed_evolution(sched, state, 1.5)
    return np.linalg.norm(got.amplitudes - ref.amplitudes)


def test_bangbang_error_halves_with_lambda():
    assert _bangbang_error(50) / _bangbang_error(100) == pytest.approx(2.0, rel=0.2)


def test_bangbang_error_below_bound_and_monotone():
    lams = [25, 50, 100, 200]
    errs = [_bangbang_error(lam) for lam in lams]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert all(e <= bangbang_error_bound(_schedule(lam)) for e, lam in zip(errs, lams))
    slope = np.polyfit(np.log(lams), np.log(errs), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.2)


# -- resources -----------------------------------------------------------------------

def test_resource_examples():
    assert resource_estimate(1, 1, 0.0, 2.0, 1, 10)[0] == pytest.approx(0.0)
    n_q, log4_ng, _ = resource_estimate(1, 1, TAU_PLUS, 0.01, 1, 10)
    assert n_q == pytest.approx(2 * (2 * TAU_PLUS + math.log(200)))
    assert log4_ng == n_q
    assert resource_estimate(1, 1, 0.0, 0.5, 1, 133)[2] == pytest.approx(math.log(133) / 2)
    with pytest.raises(ValueError):
        resource_estimate(0, 1, 0.0, 0.5, 1, 133)
