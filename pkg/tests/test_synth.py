import numpy as np
import pytest
from scipy.signal import hilbert

from tycoon import (
    GIMTComponent,
    ModelParams,
    SampledSignal,
    add_noise,
    fast_component_amp,
    fast_if_track,
    gaussian_kernel,
    make_two_component_benchmark,
    noise_std_for_snr,
    phase_from_if,
    slow_component_amp,
    slow_component_phase,
    smoothed_brownian,
    synth_gimt,
    validate_gimt,
)


class TestSmoothedBrownian:
    def test_deterministic(self):
        a = smoothed_brownian(200, 0.1, 5.0, seed=42)
        b = smoothed_brownian(200, 0.1, 5.0, seed=42)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = smoothed_brownian(200, 0.1, 5.0, seed=1)
        b = smoothed_brownian(200, 0.1, 5.0, seed=2)
        assert not np.array_equal(a, b)

    def test_kernel_normalized(self):
        for sigma in (0.5, 3.0, 17.2):
            assert abs(gaussian_kernel(sigma).sum() - 1.0) <= 1e-12

    def test_heavy_smoothing_flattens(self):
        n = 100
        ratios = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            raw = np.cumsum(rng.normal(0, np.sqrt(0.1), n))
            smooth = smoothed_brownian(n, 0.1, sigma=n, seed=seed)
            ratios.append(np.std(smooth) / np.std(raw))
        assert np.mean(ratios) <= 0.2


class TestAmplitudeTracks:
    def test_fast_amp_endpoints(self):
        path = np.array([-2.0, 0.0, 2.0, 1.0])
        amp = fast_component_amp(path)
        assert amp[2] == pytest.approx(2.0)  # at +max
        assert amp[0] == pytest.approx(1.0)  # at -max
        assert np.all((amp >= 1.0) & (amp <= 2.0))

    def test_slow_amp_range(self):
        rng = np.random.default_rng(0)
        amp = slow_component_amp(rng.standard_normal(500))
        assert np.all((amp >= 1.0) & (amp <= 2.0))

    def test_degenerate_path_flagged(self):
        with pytest.warns(UserWarning):
            amp = fast_component_amp(np.zeros(10))
        np.testing.assert_array_equal(amp, 1.5)


class TestSlowPhase:
    def test_constant_max_path_matches_closed_form(self):
        # a constant positive path makes the drift integrand 1 - sin(s),
        # whose integral is t + cos(t) - 1; the trapezoid accumulation
        # tracks it to 1e-4 relative at this step size
        n, dt = 801, 0.1
        t = np.arange(n) * dt
        phase = slow_component_phase(np.full(n, 3.7), dt)
        drift = 2 * np.pi * phase - np.pi * t
        expected = t + np.cos(t) - 1.0
        assert np.max(np.abs(drift - expected)) <= 1e-4 * np.max(np.abs(expected))

    def test_strictly_increasing_across_seeds(self):
        n, dt = 801, 0.1
        for seed in range(50):
            phase = slow_component_phase(smoothed_brownian(n, dt, 200.0, seed), dt)
            assert np.all(np.diff(phase) > 0), f"phase not increasing for seed {seed}"

    def test_if_range(self):
        # instantaneous frequency is 0.5 Hz plus a bounded drift
        n, dt = 801, 0.1
        phase = slow_component_phase(smoothed_brownian(n, dt, 200.0, 7), dt)
        if_hz = np.gradient(phase, dt)
        assert np.all(if_hz > 0.2) and np.all(if_hz < 1.0)


class TestSynth:
    def test_plain_cosine(self):
        n, dt = 33, 0.1
        phase = np.arange(n) * dt  # 1 Hz in cycles
        c = GIMTComponent(np.ones(n), phase, (0, n - 1))
        sig = synth_gimt(c, dt)
        np.testing.assert_allclose(sig.samples, np.cos(2 * np.pi * phase), atol=1e-12)

    def test_zero_outside_support(self):
        n, dt = 33, 0.1
        c = GIMTComponent(np.ones(n), np.arange(n) * dt, (10, 20))
        sig = synth_gimt(c, dt)
        assert np.all(sig.samples[:10] == 0) and np.all(sig.samples[21:] == 0)
        assert np.any(sig.samples[10:21] != 0)

    def test_envelope_recovery(self):
        # analytic-signal magnitude recovers a slowly varying amplitude
        n, dt = 801, 0.1
        t = np.arange(n) * dt
        amp = 1.5 + 0.3 * np.sin(2 * np.pi * 0.02 * t)
        c = GIMTComponent(amp, 1.3 * t, (0, n - 1))
        sig = synth_gimt(c, dt)
        envelope = np.abs(hilbert(sig.samples))
        sl = slice(n // 10, n - n // 10)
        assert np.max(np.abs(envelope[sl] - amp[sl]) / amp[sl]) <= 0.05

    def test_component_validation(self):
        with pytest.raises(ValueError):
            GIMTComponent(np.zeros(10), np.arange(10.0), (0, 9))  # amp not positive
        with pytest.raises(ValueError):
            GIMTComponent(np.ones(10), np.zeros(10), (0, 9))  # phase not increasing
        with pytest.raises(ValueError):
            GIMTComponent(np.ones(10), np.arange(10.0), (5, 12))  # support out of range


class TestBenchmark:
    def test_superposition_and_sizes(self):
        sig, fast, slow = make_two_component_benchmark(L=80, dt=0.1, seed=3)
        assert sig.n_samples == 801
        total = synth_gimt(fast, 0.1).samples + synth_gimt(slow, 0.1).samples
        np.testing.assert_array_equal(sig.samples, total)

    def test_slow_component_silent_before_onset(self):
        sig, fast, slow = make_two_component_benchmark(L=80, dt=0.1, seed=3)
        onset = int(round(20.0 / 0.1))
        assert slow.support[0] == onset
        np.testing.assert_array_equal(synth_gimt(slow, 0.1).samples[:onset], 0.0)

    def test_desk_scale_window(self):
        sig, fast, slow = make_two_component_benchmark(L=40, dt=0.1, seed=1)
        assert sig.n_samples == 401
        assert slow.support == (200, 400)

    def test_deterministic(self):
        a = make_two_component_benchmark(L=40, dt=0.1, seed=9)[0]
        b = make_two_component_benchmark(L=40, dt=0.1, seed=9)[0]
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_custom_if_track(self):
        n = 401
        if_hz = np.full(n, 1.5)
        sig, fast, _ = make_two_component_benchmark(L=40, dt=0.1, seed=1, if_hz=if_hz)
        np.testing.assert_allclose(np.gradient(fast.phase, 0.1)[5:-5], 1.5, atol=1e-6)

    def test_rejects_non_integral_window(self):
        with pytest.raises(ValueError):
            make_two_component_benchmark(L=40.05, dt=0.1)


class TestNoise:
    def test_snr_zero_matches_signal_std(self):
        sig, *_ = make_two_component_benchmark(L=80, dt=0.1, seed=3)
        noisy = add_noise(sig, 0.0, seed=11)
        ratio = np.std(noisy.samples - sig.samples) / np.std(sig.samples)
        assert ratio == pytest.approx(1.0, abs=1e-2)

    def test_infinite_snr_is_identity(self):
        sig, *_ = make_two_component_benchmark(L=40, dt=0.1, seed=3)
        noisy = add_noise(sig, np.inf, seed=11)
        np.testing.assert_array_equal(noisy.samples, sig.samples)

    def test_paper_snr_ratio(self):
        sig, *_ = make_two_component_benchmark(L=80, dt=0.1, seed=3)
        noisy = add_noise(sig, 7.25, seed=11)
        ratio = np.std(noisy.samples - sig.samples) / np.std(sig.samples)
        assert ratio == pytest.approx(10 ** (-7.25 / 20), rel=1e-9)
        assert noise_std_for_snr(sig, 7.25) == pytest.approx(
            np.std(sig.samples) * 10 ** (-7.25 / 20))

    def test_constant_signal_rejected(self):
        with pytest.raises(ValueError):
            add_noise(SampledSignal(np.ones(9), 0.1), 10.0, 0)


class TestValidation:
    def model(self, **kw):
        defaults = dict(eps=0.01, c1=0.5, c2=2.0, c3=1.0, d=0.1)
        defaults.update(kw)
        return ModelParams(**defaults)

    def test_constant_tone_passes(self):
        n, dt = 101, 0.1
        c = GIMTComponent(np.ones(n), np.arange(n) * dt, (0, n - 1))
        report = validate_gimt(c, self.model(), dt)
        assert report.passed

    def test_close_tones_fail_separation(self):
        n, dt = 101, 0.1
        c1 = GIMTComponent(np.ones(n), 1.00 * np.arange(n) * dt, (0, n - 1))
        c2 = GIMTComponent(np.ones(n), 1.05 * np.arange(n) * dt, (0, n - 1))
        report = validate_gimt([c1, c2], self.model(d=0.1), dt)
        assert not report.separation.passed
        assert not report.passed

    def test_steep_chirp_fails_bound(self):
        n, dt = 101, 0.1
        t = np.arange(n) * dt
        rate = 1.5  # c3 * 1.5
        c = GIMTComponent(np.ones(n), 0.8 * t + 0.5 * rate * t**2, (0, n - 1))
        report = validate_gimt(c, self.model(c3=1.0, c2=30.0), dt)
        names = {r.name: r.passed for r in report.component_results[0]}
        assert not names["chirp_bound"]

    def test_short_support_rejected(self):
        c = GIMTComponent(np.ones(10), np.arange(10.0), (0, 3))
        with pytest.raises(ValueError):
            validate_gimt(c, self.model(), 0.1)

    def test_invalid_model_params(self):
        with pytest.raises(ValueError):
            ModelParams(eps=0.5, c1=0.4, c2=2.0, c3=1.0, d=0.1)  # c1 < eps
        with pytest.raises(ValueError):
            ModelParams(eps=0.01, c1=0.5, c2=2.0, c3=1.0, d=0.0)
