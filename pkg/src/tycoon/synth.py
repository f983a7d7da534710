"""Benchmark signal generators and model-constraint validation.

The two-component benchmark superposes a full-length component whose
instantaneous frequency wanders quickly and a slower component that switches
on at t = 20 s. All randomness comes from smoothed Brownian paths, so every
generator is a deterministic function of its parameters and seed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .types import SampledSignal

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# component containers and model parameters
# ---------------------------------------------------------------------------

@dataclass
class GIMTComponent:
    """One amplitude-modulated oscillation A(t)*cos(2*pi*phase(t)).

    ``phase`` is in cycles; ``support`` is the inclusive sample-index
    interval outside which the component is zero.
    """

    amp: np.ndarray
    phase: np.ndarray
    support: tuple

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amp, dtype=np.float64)
        phase = np.ascontiguousarray(self.phase, dtype=np.float64)
        if amp.shape != phase.shape or amp.ndim != 1:
            raise ValueError("amp and phase must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(amp)) and np.all(np.isfinite(phase))):
            raise ValueError("component tracks contain non-finite values")
        m0, m1 = int(self.support[0]), int(self.support[1])
        if not 0 <= m0 <= m1 < amp.size:
            raise ValueError(f"support {self.support} out of range for length {amp.size}")
        sl = slice(m0, m1 + 1)
        if np.any(amp[sl] <= 0):
            raise ValueError("amplitude must be positive on the support")
        if m1 > m0 and np.any(np.diff(phase[sl]) <= 0):
            raise ValueError("phase must be strictly increasing on the support")
        self.amp, self.phase, self.support = amp, phase, (m0, m1)


@dataclass(frozen=True)
class ModelParams:
    """Constants of the oscillation model: eps bounds the growth rates,
    c1/c2 bracket amplitude and instantaneous frequency, c3 bounds the
    chirp factor, d is the minimum frequency separation."""

    eps: float
    c1: float
    c2: float
    c3: float
    d: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if not self.c2 > self.c1 > self.eps:
            raise ValueError("need c2 > c1 > eps")
        if not self.c2 > self.c3 > self.eps:
            raise ValueError("need c2 > c3 > eps")
        if self.d <= 0:
            raise ValueError("d must be positive")


# ---------------------------------------------------------------------------
# smoothed Brownian paths
# ---------------------------------------------------------------------------

def gaussian_kernel(sigma: float) -> np.ndarray:
    """Discrete Gaussian kernel with standard deviation sigma (in samples),
    truncated at +-4*sigma and normalized to unit sum."""
    if sigma <= 0:
        raise ValueError("kernel bandwidth must be positive")
    radius = max(1, math.ceil(4.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smoothed_brownian(n: int, dt: float, sigma: float, seed: int) -> np.ndarray:
    """Brownian path (cumulative Gaussian increments of std sqrt(dt))
    convolved with a Gaussian kernel of bandwidth sigma samples, using
    reflective boundary handling. Deterministic given the seed."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    path = np.cumsum(rng.normal(0.0, math.sqrt(dt), n))
    kernel = gaussian_kernel(sigma)
    radius = kernel.size // 2
    padded = np.pad(path, radius, mode="reflect")
    return np.convolve(padded, kernel, mode="valid")


# ---------------------------------------------------------------------------
# amplitude and phase tracks
# ---------------------------------------------------------------------------

def _max_abs(path: np.ndarray) -> float:
    return float(np.max(np.abs(path)))


def fast_component_amp(path: np.ndarray) -> np.ndarray:
    """Amplitude track 1 + (path + max|path|)/(2*max|path|), in [1, 2]."""
    m = _max_abs(path)
    if m == 0.0:
        warnings.warn("degenerate all-zero path: amplitude set to the midpoint 1.5")
        return np.full(path.shape, 1.5)
    return 1.0 + (path + m) / (2.0 * m)


def slow_component_amp(path: np.ndarray) -> np.ndarray:
    """Amplitude track 1 + (path + 2*max|path|)/(3*max|path|), in [4/3, 2]."""
    m = _max_abs(path)
    if m == 0.0:
        warnings.warn("degenerate all-zero path: amplitude set to the midpoint 5/3")
        return np.full(path.shape, 5.0 / 3.0)
    return 1.0 + (path + 2.0 * m) / (3.0 * m)


def slow_component_phase(path: np.ndarray, dt: float) -> np.ndarray:
    """Phase of the slow component, in cycles.

    The track pi*t + integral of (path + 0.5*max|path|)/(1.5*max|path|)
    - sin(s) is accumulated with the trapezoid rule and divided by 2*pi so
    it can be used directly inside cos(2*pi*phase); the resulting
    instantaneous frequency is 0.5 Hz plus a drift of at most ~1/3 Hz,
    and is positive for every realization since pi > 4/3.
    """
    n = path.size
    t = np.arange(n) * dt
    m = _max_abs(path)
    if m == 0.0:
        warnings.warn("degenerate all-zero path: phase drift set to its midpoint")
        bracket = np.full(n, 1.0 / 3.0)
    else:
        bracket = (path + 0.5 * m) / (1.5 * m)
    drift = cumulative_trapezoid(bracket - np.sin(t), dx=dt, initial=0.0)
    return (np.pi * t + drift) / _TWO_PI


def fast_if_track(path: np.ndarray, base_hz: float = 1.2, span_hz: float = 0.35) -> np.ndarray:
    """Fast-wandering instantaneous-frequency track, in Hz.

    base_hz plus span_hz times the path normalized to [-1, 1]. Stands in
    for externally measured fast-varying heart-rate style IF traces; see
    :func:`tycoon.io.read_if_trace` for loading real ones.
    """
    m = _max_abs(path)
    if m == 0.0:
        warnings.warn("degenerate all-zero path: constant IF track")
        return np.full(path.shape, base_hz)
    return base_hz + span_hz * (path / m)


def phase_from_if(if_hz: np.ndarray, dt: float) -> np.ndarray:
    """Integrate an instantaneous-frequency track (Hz) to a cycle phase."""
    return cumulative_trapezoid(if_hz, dx=dt, initial=0.0)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def synth_gimt(c: GIMTComponent, dt: float) -> SampledSignal:
    """Sample a component: amp*cos(2*pi*phase) on its support, 0 outside."""
    samples = np.zeros(c.amp.size)
    sl = slice(c.support[0], c.support[1] + 1)
    samples[sl] = c.amp[sl] * np.cos(_TWO_PI * c.phase[sl])
    return SampledSignal(samples, dt)


def make_two_component_benchmark(L: float = 80.0, dt: float = 0.1, sigma1: float = 100.0,
                                 sigma2: float = 200.0, seed: int = 0,
                                 if_hz: np.ndarray | None = None,
                                 fast_if_sigma: float = 10.0):
    """The two-component benchmark signal and its ground-truth components.

    Component 1 spans the whole window with a fast-wandering IF near 1.2 Hz
    (or the supplied ``if_hz`` track); component 2 holds a slower ~0.5 Hz
    oscillation supported on [20 s, 80 s] (clipped to the window). sigma1
    and sigma2 are the smoothing bandwidths, in samples, of the Brownian
    paths driving the amplitudes and the slow component's frequency drift.

    Returns (signal, fast_component, slow_component).
    """
    n_intervals = L / dt
    if abs(n_intervals - round(n_intervals)) > 1e-9:
        raise ValueError(f"L/dt must be an integer, got {n_intervals}")
    if L <= 20.0:
        raise ValueError("window must extend past the slow component's onset at 20 s")
    M = int(round(n_intervals))
    n = M + 1

    amp1 = fast_component_amp(smoothed_brownian(n, dt, sigma1, seed))
    if if_hz is None:
        if_hz = fast_if_track(smoothed_brownian(n, dt, fast_if_sigma, seed + 101))
    elif np.asarray(if_hz).shape != (n,):
        raise ValueError(f"IF track must have {n} samples")
    fast = GIMTComponent(amp1, phase_from_if(np.asarray(if_hz, dtype=np.float64), dt), (0, M))

    amp2 = slow_component_amp(smoothed_brownian(n, dt, sigma1, seed + 202))
    phase2 = slow_component_phase(smoothed_brownian(n, dt, sigma2, seed + 303), dt)
    slow = GIMTComponent(amp2, phase2, (int(round(20.0 / dt)), min(int(round(80.0 / dt)), M)))

    samples = synth_gimt(fast, dt).samples + synth_gimt(slow, dt).samples
    return SampledSignal(samples, dt), fast, slow


def add_noise(signal: SampledSignal, snr_db: float, seed: int) -> SampledSignal:
    """Add white Gaussian noise at a given SNR in dB.

    SNR is 20*log10(std(signal)/std(noise)); the realized noise is rescaled
    so its sample standard deviation hits the target exactly. An infinite
    SNR returns the signal unchanged.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return SampledSignal(signal.samples.copy(), signal.dt)
    std_f = float(np.std(signal.samples))
    if std_f == 0.0:
        raise ValueError("cannot set an SNR against a constant signal")
    target = std_f * 10.0 ** (-snr_db / 20.0)
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(signal.n_samples)
    noise = raw * (target / float(np.std(raw)))
    return SampledSignal(signal.samples + noise, signal.dt)


def noise_std_for_snr(signal: SampledSignal, snr_db: float) -> float:
    """Noise standard deviation that :func:`add_noise` realizes."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(np.std(signal.samples)) * 10.0 ** (-snr_db / 20.0)


# ---------------------------------------------------------------------------
# model-constraint validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    margin: float


@dataclass
class GIMTValidationReport:
    component_results: list
    separation: ConditionResult | None

    @property
    def passed(self) -> bool:
        ok = all(r.passed for results in self.component_results for r in results)
        if self.separation is not None:
            ok = ok and self.separation.passed
        return ok


def _component_conditions(c: GIMTComponent, mp: ModelParams, dt: float):
    sl = slice(c.support[0], c.support[1] + 1)
    if c.support[1] - c.support[0] + 1 < 5:
        raise ValueError("support too short for third differences (< 5 samples)")
    amp = c.amp[sl]
    phi_d1 = np.gradient(c.phase[sl], dt)
    phi_d2 = np.gradient(phi_d1, dt)
    phi_d3 = np.gradient(phi_d2, dt)
    amp_d1 = np.gradient(amp, dt)
    checks = [
        ("amp_bounds", (amp.min() - mp.c1, mp.c2 - amp.max())),
        ("if_bounds", (phi_d1.min() - mp.c1, mp.c2 - phi_d1.max())),
        ("chirp_bound", (mp.c3 - np.max(np.abs(phi_d2)),)),
        ("amp_growth", (np.min(mp.eps * phi_d1 - np.abs(amp_d1)),)),
        ("third_growth", (np.min(mp.eps * phi_d1 - np.abs(phi_d3)),)),
    ]
    results = []
    for name, margins in checks:
        worst = float(min(margins))
        results.append(ConditionResult(name, worst >= 0.0, worst))
    return results, phi_d1


def validate_gimt(components, mp: ModelParams, dt: float) -> GIMTValidationReport:
    """Check the boundedness, growth and separation conditions numerically.

    Derivatives are estimated by finite differences on each component's
    support. Accepts a single component or a list; with several components
    the pairwise IF separation is checked wherever supports overlap.
    """
    if isinstance(components, GIMTComponent):
        components = [components]
    per_component = []
    if_tracks = []
    for c in components:
        results, phi_d1 = _component_conditions(c, mp, dt)
        per_component.append(results)
        if_tracks.append((c.support, phi_d1))

    separation = None
    if len(components) > 1:
        worst = math.inf
        for i in range(len(components)):
            for j in range(i + 1, len(components)):
                (a0, a1), fi = if_tracks[i]
                (b0, b1), fj = if_tracks[j]
                lo, hi = max(a0, b0), min(a1, b1)
                if lo > hi:
                    continue
                fi_ov = fi[lo - a0: hi - a0 + 1]
                fj_ov = fj[lo - b0: hi - b0 + 1]
                gap = np.abs(fi_ov - fj_ov)
                worst = min(worst, float(gap.min() - mp.d))
        if math.isinf(worst):
            separation = ConditionResult("separation", True, math.inf)
        else:
            separation = ConditionResult("separation", worst >= 0.0, worst)
    return GIMTValidationReport(per_component, separation)
