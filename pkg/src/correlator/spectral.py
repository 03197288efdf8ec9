"""Turning correlator time series into spectra, peaks and a dispersion fit.

The chain is doubling to negative times, windowing, a discrete Fourier
transform, optional correlation analysis of repeated runs, peak picking and
an ``E^2`` versus ``k^2`` least-squares fit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import signal
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

Parity = Literal["antisymmetric", "symmetric", "none"]
WindowKind = Literal["rectangular", "hamming"]


@dataclass(frozen=True)
class SignalSeries:
    """Samples ``samples[n]`` at ``t0 + n * dt``."""

    t0: float
    dt: float
    samples: np.ndarray
    parity: Parity = "none"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("sampling step must be positive")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")

    @classmethod
    def from_times(cls, times: Sequence[float], samples, parity: Parity = "none") -> "SignalSeries":
        times = np.asarray(times, dtype=float)
        if len(times) < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("samples are not uniformly spaced")
        return cls(float(times[0]), float(steps[0]), samples, parity)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class Spectrum:
    omegas: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.omegas.shape != self.values.shape:
            raise ValueError("frequency grid and values differ in length")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def normalize(self) -> "Spectrum":
        peak = self.magnitude.max()
        values = self.values / peak if peak > 0 else self.values
        return Spectrum(self.omegas, values, True)

    def positive(self) -> "Spectrum":
        keep = self.omegas >= 0
        return Spectrum(self.omegas[keep], self.values[keep], self.normalized)


@dataclass(frozen=True)
class DispersionFit:
    m_h_c2: float
    c: float
    se_m: float
    se_c: float
    residual: float
    degenerate: bool = False

    def energy(self, k) -> np.ndarray:
        return np.sqrt(self.m_h_c2**2 + (self.c * np.asarray(k)) ** 2)


# -- transforms --------------------------------------------------------------

def double_signal(series: SignalSeries, parity: Parity) -> SignalSeries:
    """Extend a series starting at ``t = 0`` to ``[-T, T]`` as an odd or even function.

    The odd extension has value zero at the origin, so for
    ``antisymmetric`` the ``t = 0`` sample is replaced by zero.
    """
    if abs(series.t0) > 1e-12:
        raise ValueError(f"doubling needs a series starting at t=0, got t0={series.t0}")
    s = series.samples
    if parity == "antisymmetric":
        head = s.copy()
        head[0] = 0.0
        doubled = np.concatenate([-head[:0:-1], head])
    elif parity == "symmetric":
        doubled = np.concatenate([s[:0:-1], s])
    elif parity == "none":
        return series
    else:
        raise ValueError(f"unknown parity {parity!r}")
    return SignalSeries(-(len(s) - 1) * series.dt, series.dt, doubled, parity)


def window_weights(kind: WindowKind, length: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(length)
    if kind == "hamming":
        return np.hamming(length)
    raise ValueError(f"unknown window {kind!r}")


def apply_window(series: SignalSeries, kind: WindowKind = "hamming") -> SignalSeries:
    return replace(series, samples=series.samples * window_weights(kind, len(series)))


def dft(series: SignalSeries) -> Spectrum:
    """``sum_n dt exp(-i w t_n) s_n`` on the grid ``w_m = 2 pi m / (M dt)``, centred on zero."""
    m = len(series)
    omegas = np.fft.fftshift(np.fft.fftfreq(m, d=series.dt)) * 2 * np.pi
    raw = np.fft.fftshift(np.fft.fft(series.samples))
    values = series.dt * np.exp(-1j * omegas * series.t0) * raw
    return Spectrum(omegas, values)


def naive_dft(series: SignalSeries) -> Spectrum:
    """Direct ``O(M^2)`` evaluation of :func:`dft`, kept as a reference."""
    m = len(series)
    omegas = np.fft.fftshift(np.fft.fftfreq(m, d=series.dt)) * 2 * np.pi
    t = series.times
    values = series.dt * np.exp(-1j * np.outer(omegas, t)) @ series.samples
    return Spectrum(omegas, values)


def frequency_resolution(series: SignalSeries) -> float:
    return 2 * np.pi / (len(series) * series.dt)


def correlation_analysis(spec_a: Spectrum, spec_b: Spectrum) -> Spectrum:
    """Max-normalized ``max(Re(a conj(b)), 0)`` of two independently measured spectra."""
    if spec_a.omegas.shape != spec_b.omegas.shape or not np.allclose(spec_a.omegas, spec_b.omegas):
        raise ValueError("spectra are on different frequency grids")
    cross = np.maximum((spec_a.values * np.conj(spec_b.values)).real, 0.0)
    return Spectrum(spec_a.omegas, cross).normalize()


def find_peaks(spec: Spectrum, threshold_frac: float = 0.5) -> list[tuple[float, float]]:
    """Local maxima of ``|values|`` above ``threshold_frac`` of the global maximum.

    Positions and heights are refined by a parabola through the peak bin
    and its neighbours. Sorted by height, tallest first.
    """
    if not 0 < threshold_frac < 1:
        raise ValueError("threshold fraction must lie in (0, 1)")
    mag = spec.magnitude
    top = mag.max() if len(mag) else 0.0
    if top <= 0:
        return []
    idx, _ = signal.find_peaks(mag, height=threshold_frac * top)
    step = spec.omegas[1] - spec.omegas[0] if len(spec.omegas) > 1 else 0.0
    peaks = []
    for i in idx:
        a, b, c = mag[i - 1], mag[i], mag[i + 1]
        denom = a - 2 * b + c
        offset = 0.5 * (a - c) / denom if denom != 0 else 0.0
        height = b - 0.25 * (a - c) * offset
        peaks.append((float(spec.omegas[i] + offset * step), float(height)))
    return sorted(peaks, key=lambda p: -p[1])


def spectrum_from_series(series: SignalSeries, parity: Parity = "antisymmetric",
                         window: WindowKind = "hamming") -> Spectrum:
    """Doubling, windowing and transform in one call."""
    return dft(apply_window(double_signal(series, parity), window))


# -- dispersion --------------------------------------------------------------

def fit_dispersion(points: Sequence[tuple[float, float]],
                   sigmas: Sequence[float] | None = None) -> DispersionFit:
    """Weighted least squares of ``E^2 = (m c^2)^2 + c^2 k^2`` in the variables ``(k^2, E^2)``.

    ``sigmas`` are optional uncertainties of ``E``; they enter as
    ``sigma(E^2) = 2 E sigma``. Standard errors come from the fit covariance
    scaled by the reduced chi-square, propagated through the square roots.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (k, E) pairs")
    k, e = pts[:, 0], pts[:, 1]
    if len(np.unique(np.round(np.abs(k), 12))) < 3:
        raise ValueError("need at least three distinct |k| values")
    if np.any(e <= 0):
        raise ValueError("energies must be positive")
    x, y = k**2, e**2
    w = np.ones_like(y) if sigmas is None else 1.0 / (2 * e * np.asarray(sigmas, dtype=float)) ** 2
    design = np.column_stack([np.ones_like(x), x])
    normal = design.T @ (w[:, None] * design)
    coef = np.linalg.solve(normal, design.T @ (w * y))
    resid = y - design @ coef
    dof = max(len(y) - 2, 1)
    chi2 = float(np.sum(w * resid**2))
    cov = np.linalg.inv(normal) * (chi2 / dof)
    intercept, slope = coef
    se_int, se_slope = np.sqrt(np.maximum(np.diag(cov), 0.0))
    c = math.sqrt(slope) if slope > 0 else 0.0
    se_c = se_slope / (2 * c) if c > 0 else math.inf
    if intercept <= 0:
        return DispersionFit(0.0, c, math.inf, se_c, chi2, degenerate=True)
    m = math.sqrt(intercept)
    return DispersionFit(m, c, se_int / (2 * m), se_c, chi2)


# -- estimator wrappers --------------------------------------------------------

class SpectralTransformer(TransformerMixin, BaseEstimator):
    """Rows of uniformly sampled series (starting at ``t = 0``) to spectral magnitudes.

    ``transform`` returns ``|C(w)|`` on the non-negative frequency grid,
    stored in ``omegas_`` after ``fit``.
    """

    def __init__(self, dt: float = 1.0, parity: Parity = "antisymmetric",
                 window: WindowKind = "hamming", normalize: bool = True):
        self.dt = dt
        self.parity = parity
        self.window = window
        self.normalize = normalize

    def _spectrum(self, row) -> Spectrum:
        spec = spectrum_from_series(SignalSeries(0.0, self.dt, row), self.parity, self.window)
        spec = spec.positive()
        return spec.normalize() if self.normalize else spec

    def fit(self, X, y=None):
        X = check_array(X, dtype=None)
        self.n_features_in_ = X.shape[1]
        self.omegas_ = self._spectrum(X[0]).omegas
        return self

    def transform(self, X):
        check_is_fitted(self, "omegas_")
        X = check_array(X, dtype=None)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} samples per series, got {X.shape[1]}")
        return np.vstack([self._spectrum(row).magnitude for row in X])


class DispersionRegressor(RegressorMixin, BaseEstimator):
    """``E(k) = sqrt((m c^2)^2 + (c k)^2)`` fitted with :func:`fit_dispersion`."""

    def fit(self, X, y, sample_weight=None):
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError("X must hold a single momentum column")
        y = np.asarray(y, dtype=float)
        sigmas = None if sample_weight is None else 1.0 / np.sqrt(np.asarray(sample_weight))
        self.fit_ = fit_dispersion(list(zip(X[:, 0], y)), sigmas)
        self.m_h_c2_ = self.fit_.m_h_c2
        self.c_ = self.fit_.c
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X)
        return self.fit_.energy(X[:, 0])


# -- output ------------------------------------------------------------------

def write_spectrum_csv(path: str | Path, spec: Spectrum) -> Path:
    """Columns ``omega,re,im,normalized_magnitude``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mag = spec.magnitude
    top = mag.max() if mag.size and mag.max() > 0 else 1.0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega", "re", "im", "normalized_magnitude"])
        for w, v, a in zip(spec.omegas, spec.values, mag / top):
            writer.writerow([repr(float(w)), repr(float(v.real)), repr(float(v.imag)), repr(float(a))])
    return path


def spectrum_filename(n: int) -> str:
    return f"spectrum_k{n}.csv"


__all__ = [
    "SignalSeries", "Spectrum", "DispersionFit", "double_signal", "apply_window", "window_weights",
    "dft", "naive_dft", "frequency_resolution", "correlation_analysis", "find_peaks",
    "spectrum_from_series", "fit_dispersion", "SpectralTransformer", "DispersionRegressor",
    "write_spectrum_csv", "spectrum_filename",
]
