"""SiPM front-end tests.

The dead-time model is checked against a dictionary-based replay oracle
written as plainly as possible; waveform synthesis against the analytic
template and linearity.
"""

import numpy as np
import pytest

from sipm_link.events import EventTimes, homogeneous_poisson, substream
from sipm_link.sipm import (MeasurementError, PulseTemplate, SiPMParams,
                            Waveform, calibrated_sipm_params,
                            calibrated_tau_fall, draw_amplitude_scales,
                            measure_fwhm, microcell_filter, synth_waveform,
                            template_fwhm)


def replay_dead_time(times, cells, recovery):
    """Step-by-step reference: keep an event unless its cell fired (and was
    kept) within the preceding recovery window."""
    last_fire = {}
    kept = []
    for t, c in zip(times, cells):
        if c not in last_fire or t - last_fire[c] >= recovery:
            kept.append(t)
            last_fire[c] = t
    return np.asarray(kept)


def default_template() -> PulseTemplate:
    return PulseTemplate.from_params(calibrated_sipm_params())


class TestMicrocellFilter:
    def test_single_event_survives(self):
        ev = EventTimes(np.array([1e-6]), 1e-3)
        out = microcell_filter(ev, SiPMParams(), 1)
        assert np.array_equal(out.times, ev.times)

    def test_window_semantics_single_cell(self):
        params = SiPMParams(n_microcells=1, recovery_time=30e-9)
        close = EventTimes(np.array([0.0, 15e-9]), 1e-6)
        spaced = EventTimes(np.array([0.0, 60e-9]), 1e-6)
        assert len(microcell_filter(close, params, 1)) == 1
        assert len(microcell_filter(spaced, params, 1)) == 2

    def test_non_paralyzable_semantics(self):
        # middle event is swallowed but must not extend the dead window
        params = SiPMParams(n_microcells=1, recovery_time=30e-9)
        ev = EventTimes(np.array([0.0, 20e-9, 35e-9]), 1e-6)
        out = microcell_filter(ev, params, 1)
        assert np.array_equal(out.times, [0.0, 35e-9])

    def test_matches_replay_with_same_assignments(self):
        params = SiPMParams()
        ev = homogeneous_poisson(2e8, 1e-4, 77)
        cells = substream(5).integers(0, params.n_microcells, size=len(ev))
        expected = replay_dead_time(ev.times, cells, params.recovery_time)
        # same cell draw: identical integers stream
        out = microcell_filter(ev, params, substream(5))
        assert np.array_equal(out.times, expected)

    def test_rate_sweep_against_independent_replay(self):
        # survival rate across 1e5..1e9 cps matches an independently seeded
        # replay within 1%
        params = SiPMParams()
        for i, rate in enumerate([1e5, 1e7, 1e8, 1e9]):
            duration = min(1.0, 2e5 / rate)
            ev = homogeneous_poisson(rate, duration, 100 + i)
            out = microcell_filter(ev, params, 200 + i)
            oracle_ev = homogeneous_poisson(rate, duration, 300 + i)
            oracle_cells = np.random.default_rng(400 + i).integers(
                0, params.n_microcells, size=len(oracle_ev))
            kept = replay_dead_time(oracle_ev.times, oracle_cells,
                                    params.recovery_time)
            assert len(out) / max(len(kept), 1) == pytest.approx(1.0, abs=0.01)

    def test_infinite_cells_is_identity(self):
        params = SiPMParams(n_microcells=10**9)
        ev = homogeneous_poisson(1e8, 1e-6, 8)
        assert len(ev) >= 50
        out = microcell_filter(ev, params, 9)
        assert np.array_equal(out.times, ev.times)

    def test_output_subset_and_sorted(self):
        ev = homogeneous_poisson(5e8, 1e-5, 13)
        out = microcell_filter(ev, SiPMParams(), 14)
        assert np.all(np.diff(out.times) >= 0)
        assert np.isin(out.times, ev.times).all()
        assert len(out) <= len(ev)

    def test_saturation_bounded_and_monotone(self):
        # output rate grows with input rate but stays below cells/recovery
        params = SiPMParams()
        ceiling = params.n_microcells / params.recovery_time
        rates = [1e9, 1e10, 1e11]
        outputs = []
        for i, rate in enumerate(rates):
            duration = 3e5 / rate
            ev = homogeneous_poisson(rate, duration, 60 + i)
            outputs.append(len(microcell_filter(ev, params, 70 + i)) / duration)
        assert outputs[0] < outputs[1] < outputs[2] < ceiling


class TestSynthWaveform:
    def test_no_events_zero_waveform(self):
        w = synth_waveform(EventTimes(np.empty(0), 1e-6), default_template(),
                           1e10, 1e-6)
        assert not np.any(w.samples)

    def test_single_event_peak_and_width(self):
        template = default_template()
        ev = EventTimes(np.array([20e-9]), 200e-9)
        w = synth_waveform(ev, template, 1e10, 200e-9)
        assert w.samples.max() == pytest.approx(template.amplitude, rel=0.02)
        assert measure_fwhm(w) == pytest.approx(8e-9, abs=0.5e-9)

    def test_coincident_events_add(self):
        template = default_template()
        ev = EventTimes(np.array([20e-9, 20e-9]), 200e-9)
        w = synth_waveform(ev, template, 1e10, 200e-9)
        assert w.samples.max() == pytest.approx(2.0 * template.amplitude, rel=0.02)

    def test_additivity(self):
        template = default_template()
        rng = np.random.default_rng(3)
        t_a = np.sort(rng.uniform(0, 0.8e-6, 40))
        t_b = np.sort(rng.uniform(0, 0.8e-6, 25))
        both = np.sort(np.concatenate([t_a, t_b]))
        wa = synth_waveform(EventTimes(t_a, 1e-6), template, 1e9, 1e-6)
        wb = synth_waveform(EventTimes(t_b, 1e-6), template, 1e9, 1e-6)
        wab = synth_waveform(EventTimes(both, 1e-6), template, 1e9, 1e-6)
        np.testing.assert_allclose(wab.samples, wa.samples + wb.samples,
                                   rtol=1e-12, atol=1e-20)

    def test_resolution_guard(self):
        with pytest.raises(ValueError):
            synth_waveform(EventTimes(np.empty(0), 1e-6), default_template(),
                           5e8, 1e-6)

    def test_amplitude_dispersion_hook(self):
        template = default_template()
        ev = EventTimes(np.array([20e-9]), 200e-9)
        w = synth_waveform(ev, template, 1e10, 200e-9,
                           amplitude_scale=np.array([0.5]))
        assert w.samples.max() == pytest.approx(0.5 * template.amplitude, rel=0.02)

    def test_dispersion_draws(self):
        params = calibrated_sipm_params()
        scales = draw_amplitude_scales(200_000, params, 4)
        assert scales.mean() == pytest.approx(1.0, abs=5e-4)
        assert scales.std() == pytest.approx(params.amplitude_sigma, rel=0.02)
        quiet = calibrated_sipm_params(amplitude_sigma=0.0)
        assert np.array_equal(draw_amplitude_scales(10, quiet, 4), np.ones(10))


class TestMeasureFwhm:
    def test_rectangular_pulse(self):
        fs = 1e9
        y = np.zeros(400)
        y[100:180] = 1.0
        width = measure_fwhm(Waveform(y, fs))
        assert width == pytest.approx(80e-9, abs=1.0 / fs)

    def test_doubled_tau_fall_widens(self):
        tau_fall = calibrated_tau_fall()
        base = template_fwhm(PulseTemplate(1.0, 1e-9, tau_fall))
        doubled = template_fwhm(PulseTemplate(1.0, 1e-9, 2 * tau_fall))
        assert 1.5 < doubled / base < 2.2

    def test_flat_waveform_rejected(self):
        with pytest.raises(MeasurementError):
            measure_fwhm(Waveform(np.zeros(100), 1e9))

    def test_multi_pulse_rejected(self):
        y = np.zeros(500)
        y[100:120] = 1.0
        y[300:330] = 0.9
        with pytest.raises(MeasurementError):
            measure_fwhm(Waveform(y, 1e9))


class TestCalibration:
    def test_calibrated_template_hits_target(self):
        assert template_fwhm(default_template()) == pytest.approx(8e-9, abs=0.1e-9)

    def test_default_parameters(self):
        params = calibrated_sipm_params()
        assert params.n_microcells == 2880
        assert params.recovery_time == 30e-9
        assert params.tau_rise == 1e-9
        assert params.tau_fall > params.tau_rise

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            SiPMParams(tau_rise=5e-9, tau_fall=2e-9)
        with pytest.raises(ValueError):
            SiPMParams(n_microcells=0)
