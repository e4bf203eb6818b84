"""End-to-end link experiments.

Composes the event, SiPM, analog-chain and receiver stages into the
measurement campaigns of the study: Monte Carlo BER (fast ideal-counts
path and full-waveform path), dynamic range versus optical power,
threshold sweeps, the gain-bandwidth-product study, and the pure-theory
power-penalty tables.

Every experiment is a pure function of (config, master_seed): rerunning
writes byte-identical CSV.  Full-waveform runs stream the waveform in
chunks with filter/comparator state carried across boundaries, so the
chunk size never changes the result (tested).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _kernels, theory
from .analog import (AmplifierConfig, ComparatorConfig, DigitalPulseTrain,
                     NoiseConfig, lpf_alpha, min_width_filter, noise_sigma,
                     threshold_sweep)
from .events import (STREAM_AMPLITUDE, STREAM_DARK, STREAM_IDEAL_COUNTS,
                     STREAM_MICROCELL, STREAM_NOISE, STREAM_SIGNAL, BitStream,
                     EventTimes, derive_seed, homogeneous_poisson, merge,
                     ook_signal_events, substream)
from .receiver import (BerReport, BitWindowCounts, LfsrConfig, bathtub,
                       ber_measure, decide, interleaved_count, lfsr_prbs)
from .sipm import (MIN_SAMPLES_PER_TAU_RISE, PulseTemplate, SiPMParams,
                   Waveform, calibrated_sipm_params, draw_amplitude_scales,
                   microcell_filter)
from .theory import LinkParams, PhotonBudget, dbm_to_watts

# Input-referred white noise density of the readout model, V/sqrt(Hz).
# Calibration target (with the 0.24 mV single-photon amplitude) chosen so a
# 1 mV comparator threshold reproduces the three gain-bandwidth operating
# regimes: (1x, 500 MHz) never counts, (20x, 6 MHz) counts cleanly,
# (40x, 2 MHz) loses most single-photon pulses.
DEFAULT_INPUT_NOISE_PSD = 4e-10

GBP_STUDY_VTH = 1e-3
GBP_STUDY_HYSTERESIS_FRACTION = 0.25

# the nine gain/bandwidth splits of the study, grouped by their GBP
DEFAULT_GAIN_BW_PAIRS = (
    (1.0, 500e6), (10.0, 50e6), (500.0, 1e6),
    (1.0, 120e6), (20.0, 6e6), (120.0, 1e6),
    (1.0, 80e6), (40.0, 2e6), (80.0, 1e6),
)

MODE_IDEAL = "ideal-counts"
MODE_WAVEFORM = "full-waveform"


@dataclass(frozen=True)
class LinkConfig:
    """Everything a link simulation needs, in one reproducible bundle."""

    link: LinkParams
    sipm: SiPMParams
    amp: AmplifierConfig
    noise: NoiseConfig
    comparator: ComparatorConfig
    prbs: LfsrConfig = field(default_factory=LfsrConfig)
    n_bits: int = 100_000
    sample_rate: float = 1e9
    master_seed: int = 0
    mode: str = MODE_IDEAL
    min_pulse_width: float = 5e-9
    ac_coupling_hz: float | None = None
    n_t: int | None = None
    budget_override: PhotonBudget | None = None
    chunk_bits: int = 10_000
    waveform_dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.n_bits < 1:
            raise ValueError(f"n_bits must be >= 1, got {self.n_bits!r}")
        if self.chunk_bits < 1:
            raise ValueError(f"chunk_bits must be >= 1, got {self.chunk_bits!r}")
        if self.mode not in (MODE_IDEAL, MODE_WAVEFORM):
            raise ValueError(f"mode must be {MODE_IDEAL!r} or {MODE_WAVEFORM!r}")
        if self.waveform_dtype not in ("float32", "float64"):
            raise ValueError(
                f"waveform_dtype must be float32 or float64, got "
                f"{self.waveform_dtype!r}")
        if self.mode == MODE_WAVEFORM:
            if self.sample_rate * self.sipm.tau_rise < MIN_SAMPLES_PER_TAU_RISE:
                raise ValueError(
                    f"sample_rate {self.sample_rate:g} cannot resolve "
                    f"tau_rise {self.sipm.tau_rise:g}")
            if not self.amp.bandwidth < self.sample_rate / 2.0:
                raise ValueError(
                    f"bandwidth {self.amp.bandwidth:g} must be below "
                    f"sample_rate/2 = {self.sample_rate / 2:g}")

    @property
    def dtype(self):
        return np.float32 if self.waveform_dtype == "float32" else np.float64


def photon_budget(cfg: LinkConfig) -> PhotonBudget:
    """Detected photons per bit implied by the link operating point."""
    if cfg.budget_override is not None:
        return cfg.budget_override
    link = cfg.link
    lam_s = theory.lambda_s(link.peak_power, link.bit_time, link.wavelength,
                            link.pde)
    return PhotonBudget(lambda_s=lam_s,
                        lambda_b=link.dark_count_rate * link.bit_time)


# ---------------------------------------------------------------------------
# full-waveform pipeline


def _detected_events(cfg: LinkConfig, tx: BitStream) -> tuple[EventTimes, np.ndarray]:
    """Signal + dark arrivals, dead-time filtered, with per-event amplitudes."""
    budget = photon_budget(cfg)
    duration = tx.duration
    rate_peak = budget.lambda_s / cfg.link.bit_time
    dark_rate = budget.lambda_b / cfg.link.bit_time
    signal = ook_signal_events(tx, rate_peak, substream(cfg.master_seed, STREAM_SIGNAL))
    dark = homogeneous_poisson(dark_rate, duration,
                               substream(cfg.master_seed, STREAM_DARK))
    detected = microcell_filter(merge(signal, dark), cfg.sipm,
                                substream(cfg.master_seed, STREAM_MICROCELL))
    scales = draw_amplitude_scales(len(detected), cfg.sipm,
                                   substream(cfg.master_seed, STREAM_AMPLITUDE))
    return detected, scales


def _chain_chunks(cfg: LinkConfig, events: EventTimes, scales: np.ndarray,
                  duration: float):
    """Yield (sample_offset, processed_chunk) through gain/filter/noise.

    Pulse tails, filter states and the noise stream all carry across chunk
    boundaries, so the concatenated output is independent of chunk size.
    """
    fs = cfg.sample_rate
    template = PulseTemplate.from_params(cfg.sipm)
    n_total = int(round(duration * fs))
    chunk = max(1, int(round(cfg.chunk_bits * cfg.link.bit_time * fs)))
    n_window = int(math.ceil(template.tail_time() * fs)) + 2
    amps = scales * template.amplitude

    alpha_lp = lpf_alpha(cfg.amp.bandwidth, fs)
    alpha_dc = (lpf_alpha(cfg.ac_coupling_hz, fs)
                if cfg.ac_coupling_hz is not None else None)
    sigma = noise_sigma(cfg.noise, cfg.amp.bandwidth, cfg.amp.gain)
    noise_rng = substream(cfg.master_seed, STREAM_NOISE)
    dtype = cfg.dtype

    dt = 1.0 / fs
    lp_state = 0.0
    dc_state = 0.0
    noise_buf = np.empty(chunk, dtype=dtype) if sigma > 0.0 else None
    offset = 0
    while offset < n_total:
        n = min(chunk, n_total - offset)
        # slightly generous backlog bound: the render kernel clips per-event
        # windows itself, so over-selection at the margin is free
        lo = np.searchsorted(events.times, (offset - n_window - 2) * dt)
        hi = np.searchsorted(events.times, (offset + n) * dt)
        canvas = np.zeros(n, dtype=dtype)
        if hi > lo:
            _kernels.render_pulses(canvas, events.times[lo:hi], amps[lo:hi],
                                   offset, dt, 1.0 / template.tau_fall,
                                   1.0 / template.tau_rise,
                                   1.0 / template.peak_norm, n_window)
        canvas *= dtype(cfg.amp.gain)
        lp_state = _kernels.single_pole_inplace(canvas, alpha_lp, lp_state)
        if alpha_dc is not None:
            dc_state = _kernels.highpass_inplace(canvas, alpha_dc, dc_state)
        if sigma > 0.0:
            noise = noise_buf[:n]
            noise_rng.standard_normal(dtype=dtype, out=noise)
            noise *= dtype(sigma)
            canvas += noise
        yield offset, canvas
        offset += n


def _chain_edges(cfg: LinkConfig, events: EventTimes, scales: np.ndarray,
                 duration: float) -> DigitalPulseTrain:
    """Run the chain and the hysteresis comparator, returning edge times."""
    dtype = cfg.dtype
    v_thu = dtype(cfg.comparator.v_thu)
    v_thl = dtype(cfg.comparator.v_thl)
    high = False
    rises, falls = [], []
    for offset, canvas in _chain_chunks(cfg, events, scales, duration):
        r, f, high = _kernels.hysteresis_edges(canvas, v_thu, v_thl, high)
        rises.append(r + offset)
        falls.append(f + offset)
    fs = cfg.sample_rate
    return DigitalPulseTrain(np.concatenate(rises) / fs,
                             np.concatenate(falls) / fs)


def _chain_waveform(cfg: LinkConfig, events: EventTimes, scales: np.ndarray,
                    duration: float) -> Waveform:
    """Materialize the full processed waveform (short runs only)."""
    parts = [c for _, c in _chain_chunks(cfg, events, scales, duration)]
    return Waveform(np.concatenate(parts), cfg.sample_rate)


def _counts_full_waveform(cfg: LinkConfig, tx: BitStream) -> BitWindowCounts:
    events, scales = _detected_events(cfg, tx)
    train = _chain_edges(cfg, events, scales, tx.duration)
    train = min_width_filter(train, cfg.min_pulse_width)
    return interleaved_count(train, cfg.link.bit_time, len(tx))


def _counts_ideal(cfg: LinkConfig, tx: BitStream) -> BitWindowCounts:
    budget = photon_budget(cfg)
    rng = substream(cfg.master_seed, STREAM_IDEAL_COUNTS)
    lam = budget.lambda_b + budget.lambda_s * tx.bits.astype(np.float64)
    return BitWindowCounts(rng.poisson(lam), cfg.link.bit_time)


def simulate_counts(cfg: LinkConfig) -> tuple[BitStream, BitWindowCounts]:
    """Transmitted bits and per-bit receiver counts for the configured mode."""
    tx = lfsr_prbs(cfg.prbs, cfg.n_bits, cfg.link.bit_time)
    if cfg.mode == MODE_IDEAL:
        return tx, _counts_ideal(cfg, tx)
    return tx, _counts_full_waveform(cfg, tx)


def simulate_bathtub(cfg: LinkConfig, n_t_grid=range(16)):
    """BER versus digital threshold for one link realization."""
    tx, counts = simulate_counts(cfg)
    return bathtub(counts, tx, n_t_grid)


def simulate_link(cfg: LinkConfig) -> BerReport:
    """Monte Carlo BER at the bathtub-optimal threshold (or cfg.n_t)."""
    tx, counts = simulate_counts(cfg)
    if cfg.n_t is not None:
        return ber_measure(tx, decide(counts, cfg.n_t), n_t=cfg.n_t)
    _, best = bathtub(counts, tx, range(16))
    return best


# ---------------------------------------------------------------------------
# continuous-light counting (dynamic range, threshold sweeps, GBP study)


def _cw_detected_rate(cfg: LinkConfig, avg_power: float) -> float:
    """Detected avalanche rate under unmodulated light at avg_power."""
    return avg_power / theory.photon_energy(cfg.link.wavelength) * cfg.link.pde


def _cw_events(cfg: LinkConfig, detected_rate: float, duration: float,
               seed: int) -> tuple[EventTimes, np.ndarray]:
    signal = homogeneous_poisson(detected_rate, duration,
                                 substream(seed, STREAM_SIGNAL))
    dark = homogeneous_poisson(cfg.link.dark_count_rate, duration,
                               substream(seed, STREAM_DARK))
    detected = microcell_filter(merge(signal, dark), cfg.sipm,
                                substream(seed, STREAM_MICROCELL))
    scales = draw_amplitude_scales(len(detected), cfg.sipm,
                                   substream(seed, STREAM_AMPLITUDE))
    return detected, scales


def count_pulses_cw(cfg: LinkConfig, avg_power: float, duration: float,
                    seed: int | None = None) -> int:
    """Comparator pulse count under continuous light (plus dark counts)."""
    seed = cfg.master_seed if seed is None else seed
    events, scales = _cw_events(cfg, _cw_detected_rate(cfg, avg_power),
                                duration, seed)
    cfg = replace(cfg, master_seed=seed)
    train = _chain_edges(cfg, events, scales, duration)
    return min_width_filter(train, cfg.min_pulse_width).n_pulses


def run_dark_counts(cfg: LinkConfig, duration: float = 1.0) -> int:
    """Dark-only pipeline: pulses counted with the light off."""
    return count_pulses_cw(cfg, 0.0, duration)


def run_dynamic_range(cfg: LinkConfig, power_grid, duration: float = 0.02):
    """Measured versus theoretical count rate over an optical power sweep.

    The theory column is the detected-photon rate from the per-bit energy
    balance plus the dark rate; the measured column runs the full pipeline
    under continuous light.  Returns (avg_power_w, counts_per_s,
    theory_counts_per_s) rows.
    """
    rows = []
    for i, power in enumerate(np.asarray(power_grid, dtype=float)):
        seed = derive_seed(cfg.master_seed, 101, i)
        n = count_pulses_cw(cfg, float(power), duration, seed=seed)
        theory_rate = _cw_detected_rate(cfg, float(power)) + cfg.link.dark_count_rate
        rows.append((float(power), n / duration, theory_rate))
    return rows


def run_threshold_sweep(cfg: LinkConfig, v_th_grid, duration: float = 0.05,
                        avg_power: float = 0.0, *,
                        hysteresis: float | None = None,
                        hysteresis_fraction: float | None = None):
    """Count rate versus comparator threshold on one captured waveform."""
    if hysteresis is None and hysteresis_fraction is None:
        hysteresis = cfg.comparator.hysteresis
    events, scales = _cw_events(cfg, _cw_detected_rate(cfg, avg_power),
                                duration, cfg.master_seed)
    waveform = _chain_waveform(cfg, events, scales, duration)
    return threshold_sweep(waveform, v_th_grid, hysteresis=hysteresis,
                           hysteresis_fraction=hysteresis_fraction,
                           min_width=cfg.min_pulse_width)


# ---------------------------------------------------------------------------
# BER versus optical power


def run_ber_vs_power(cfg: LinkConfig, power_grid, data_rates):
    """BER at the bathtub-optimal threshold per (data rate, power) point.

    Includes the closed-form error probability at the ideal optimal
    threshold as the Poisson-limit column.  Returns rows of
    (data_rate, avg_power_w, ber, n_t, theory_pe).
    """
    rows = []
    for i, rate in enumerate(np.asarray(data_rates, dtype=float)):
        for j, power in enumerate(np.asarray(power_grid, dtype=float)):
            link = replace(cfg.link, data_rate=float(rate),
                           avg_optical_power=float(power))
            point = replace(cfg, link=link, budget_override=None,
                            master_seed=derive_seed(cfg.master_seed, 202, i, j))
            report = simulate_link(point)
            limit = theory.poisson_limit(photon_budget(point))
            rows.append((float(rate), float(power), report.ber, report.n_t,
                         limit.pe))
    return rows


# ---------------------------------------------------------------------------
# gain-bandwidth-product study


@dataclass(frozen=True)
class GbpStudyResult:
    pulse_stats: list[tuple]      # (gbp, gain, bw, peak_mean, peak_std, frac_above)
    counts: list[tuple]           # (gbp, gain, bw, avg_power, counts_per_s, theory)
    required_power: list[tuple]   # (gbp, gain, bw, data_rate, theory_w, scaled_w)


def _gbp_chain_config(cfg: LinkConfig, gain: float, bw: float,
                      sample_rate: float) -> LinkConfig:
    amp = AmplifierConfig(gain=gain, bandwidth=bw)
    comp = ComparatorConfig(
        v_th=GBP_STUDY_VTH,
        hysteresis=GBP_STUDY_HYSTERESIS_FRACTION * GBP_STUDY_VTH)
    return replace(cfg, amp=amp, comparator=comp, sample_rate=sample_rate,
                   min_pulse_width=0.0, ac_coupling_hz=None)


def _filtered_pulse_reference(cfg: LinkConfig) -> tuple[int, float, float]:
    """Noiseless single-pulse response: peak sample offset, peak voltage,
    and the time the pulse spends above the comparator release level."""
    quiet = replace(cfg, noise=NoiseConfig(0.0, seed=0))
    template = PulseTemplate.from_params(cfg.sipm)
    dt = 1.0 / cfg.sample_rate
    settle = template.tail_time() + 10.0 / (2.0 * math.pi * cfg.amp.bandwidth)
    start = int(round(0.1 * settle / dt)) + 1
    # half a sample early: the first rendered sample is then exactly `start`
    events = EventTimes(np.array([(start - 0.5) * dt]), settle * 1.2)
    wave = _chain_waveform(quiet, events, np.ones(1), events.duration)
    samples = np.asarray(wave.samples, dtype=np.float64)
    peak_idx = int(np.argmax(samples))
    above = samples >= cfg.comparator.v_thl
    width = float(np.count_nonzero(above)) / cfg.sample_rate
    return peak_idx - start, float(samples[peak_idx]), width


def gbp_pulse_statistics(cfg: LinkConfig, gain: float, bw: float,
                         n_pulses: int = 1000, sample_rate: float = 1e10,
                         seed_path: tuple = ()):
    """Peak-amplitude statistics of isolated single-photon pulses.

    Pulses are placed on the sample grid far enough apart for the filter
    to settle; each measured amplitude is the filtered waveform sampled at
    the known per-config peak offset, so the statistic reflects amplitude
    dispersion and additive noise, not pile-up.
    """
    point = _gbp_chain_config(cfg, gain, bw, sample_rate)
    offset, nominal_peak, _ = _filtered_pulse_reference(point)
    template = PulseTemplate.from_params(cfg.sipm)
    spacing_s = template.tail_time() + 12.0 / (2.0 * math.pi * bw)
    spacing = int(math.ceil(spacing_s * sample_rate))
    starts = (np.arange(n_pulses) + 1) * spacing
    duration = (n_pulses + 2) * spacing / sample_rate
    # same half-sample placement as the reference, so `offset` lines up
    times = (starts - 0.5) / sample_rate
    events = EventTimes(times, duration)
    seed = derive_seed(cfg.master_seed, 303, *seed_path)
    scales = draw_amplitude_scales(n_pulses, cfg.sipm, substream(seed, STREAM_AMPLITUDE))
    point = replace(point, master_seed=seed)
    wave = _chain_waveform(point, events, scales, duration)
    peaks = np.asarray(wave.samples, dtype=np.float64)[starts + offset]
    frac_above = float(np.mean(peaks > point.comparator.v_th))
    return float(peaks.mean()), float(peaks.std()), frac_above, nominal_peak


def run_gbp_study(cfg: LinkConfig, gain_bw_pairs=DEFAULT_GAIN_BW_PAIRS,
                  power_grid=None, data_rates=None, gbp_list=None,
                  n_pulses: int = 1000, count_duration: float = 0.03,
                  count_sample_rate: float = 2e9) -> GbpStudyResult:
    """The three gain-bandwidth-product tables.

    1. single-photon pulse statistics per (gain, bandwidth) split;
    2. count rate versus optical power per split (full pipeline);
    3. required average power versus data rate per split: the Poisson-limit
       requirement divided by the measured counting efficiency, marked
       unreachable (nan) once the required per-bit photon flux piles up
       within the filtered pulse width.
    """
    pairs = [(float(g), float(b)) for g, b in gain_bw_pairs]
    if gbp_list is not None:
        allowed = {float(x) for x in gbp_list}
        pairs = [p for p in pairs if p[0] * p[1] in allowed]
    if power_grid is None:
        power_grid = [dbm_to_watts(d) for d in (-76, -73, -70, -67)]
    if data_rates is None:
        data_rates = (1e4, 3e4, 1e5, 3e5, 1e6)

    pulse_rows = []
    count_rows = []
    required_rows = []
    for k, (gain, bw) in enumerate(pairs):
        gbp = gain * bw
        mean, std, frac, _ = gbp_pulse_statistics(cfg, gain, bw,
                                                  n_pulses=n_pulses,
                                                  seed_path=(k,))
        pulse_rows.append((gbp, gain, bw, mean, std, frac))

        point = _gbp_chain_config(cfg, gain, bw, count_sample_rate)
        _, _, width = _filtered_pulse_reference(point)
        efficiencies = []
        for j, power in enumerate(np.asarray(power_grid, dtype=float)):
            seed = derive_seed(cfg.master_seed, 404, k, j)
            n = count_pulses_cw(point, float(power), count_duration, seed=seed)
            theory_rate = (_cw_detected_rate(point, float(power))
                           + point.link.dark_count_rate)
            count_rows.append((gbp, gain, bw, float(power),
                               n / count_duration, theory_rate))
            if theory_rate > 0:
                efficiencies.append((n / count_duration) / theory_rate)
        efficiency = efficiencies[0] if efficiencies else 0.0

        for rate in np.asarray(data_rates, dtype=float):
            lam_b = cfg.link.dark_count_rate / rate
            lam_s = theory.required_lambda_s(lam_b, 1e-3)
            required = theory.required_avg_power(
                cfg.link.dark_count_rate, float(rate), 1e-3, cfg.link.pde,
                cfg.link.wavelength)
            # pulse pile-up bound: the peak-rate photon flux must leave the
            # comparator time to release between pulses
            feasible = efficiency > 0.05 and lam_s * rate * width < 0.3
            scaled = required / efficiency if feasible else float("nan")
            required_rows.append((gbp, gain, bw, float(rate), required, scaled))
    return GbpStudyResult(pulse_rows, count_rows, required_rows)


# ---------------------------------------------------------------------------
# generic sweep front end

SWEEP_VARIABLES = ("optical_power", "v_th", "n_t", "data_rate", "gbp")


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable, its grid, and per-run keyword overrides."""

    variable: str
    grid: tuple
    overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        grid = tuple(self.grid)
        if not grid:
            raise ValueError("grid must be non-empty")
        if self.variable != "gbp" and list(grid) != sorted(grid):
            raise ValueError("grid must be sorted ascending")
        object.__setattr__(self, "grid", grid)


def run_sweep(cfg: LinkConfig, spec: SweepSpec):
    """Dispatch a SweepSpec to the matching campaign; returns its rows."""
    if spec.variable == "optical_power":
        return run_dynamic_range(cfg, spec.grid, **spec.overrides)
    if spec.variable == "v_th":
        return run_threshold_sweep(cfg, spec.grid, **spec.overrides)
    if spec.variable == "n_t":
        rows, _ = simulate_bathtub(cfg, [int(n) for n in spec.grid])
        return [(r.n_t, r.n_bits, r.n_errors, r.ber) for r in rows]
    if spec.variable == "data_rate":
        overrides = dict(spec.overrides)
        power = overrides.pop("avg_power", cfg.link.avg_optical_power)
        return run_ber_vs_power(cfg, [power], spec.grid)
    return run_gbp_study(cfg, gbp_list=spec.grid, **spec.overrides)


# ---------------------------------------------------------------------------
# pure theory tables


def run_power_penalty(lambda_b_grid, dark_rates, data_rates,
                      target_pe: float = 1e-3, pde: float = 0.036,
                      wavelength: float = 620e-9):
    """Required signal photons versus background, and required average
    optical power versus data rate for each dark count rate.  No Monte
    Carlo; every value comes from the closed-form module."""
    outer = theory.power_penalty_curve(lambda_b_grid, target_pe)
    inset = []
    for dark in np.asarray(dark_rates, dtype=float):
        for rate in np.asarray(data_rates, dtype=float):
            watts = theory.required_avg_power(float(dark), float(rate),
                                              target_pe, pde, wavelength)
            inset.append((float(dark), float(rate), watts,
                          theory.watts_to_dbm(watts)))
    return outer, inset


# ---------------------------------------------------------------------------
# presets and config I/O

REALTIME_CHAIN_GAIN = 1667.0      # 0.24 mV single-pe -> ~0.4 V at the comparator
OFFLINE_CHAIN_GAIN = 167.0        # 0.24 mV -> ~40 mV at the oscilloscope


def realtime_chain_config(**overrides) -> LinkConfig:
    """Real-time receiver settings: three-amplifier equivalent gain, 0.2 V
    comparator threshold, 5 ns interface minimum pulse width."""
    sigma_target = 25e-3
    gain = REALTIME_CHAIN_GAIN
    bw = 450e6
    base = dict(
        link=LinkParams(wavelength=620e-9, pde=0.036, data_rate=1e6,
                        dark_count_rate=35e3,
                        avg_optical_power=dbm_to_watts(-74.98)),
        sipm=calibrated_sipm_params(),
        amp=AmplifierConfig(gain=gain, bandwidth=bw),
        noise=NoiseConfig(input_psd=sigma_target / (gain * math.sqrt(bw))),
        comparator=ComparatorConfig(v_th=0.2, hysteresis=0.05),
        mode=MODE_WAVEFORM,
        min_pulse_width=5e-9,
    )
    base.update(overrides)
    return LinkConfig(**base)


def offline_chain_config(**overrides) -> LinkConfig:
    """Oscilloscope-processing settings: two-amplifier equivalent gain,
    18 mV threshold with 5 mV hysteresis, AC-coupled, no interface width
    limit."""
    sigma_target = 1e-3
    gain = OFFLINE_CHAIN_GAIN
    bw = 450e6
    base = dict(
        link=LinkParams(wavelength=620e-9, pde=0.036, data_rate=1e6,
                        dark_count_rate=30e3,
                        avg_optical_power=dbm_to_watts(-74.0)),
        sipm=calibrated_sipm_params(),
        amp=AmplifierConfig(gain=gain, bandwidth=bw),
        noise=NoiseConfig(input_psd=sigma_target / (gain * math.sqrt(bw))),
        comparator=ComparatorConfig(v_th=18e-3, hysteresis=5e-3),
        mode=MODE_WAVEFORM,
        min_pulse_width=0.0,
        ac_coupling_hz=1e5,
    )
    base.update(overrides)
    return LinkConfig(**base)


def gbp_study_config(**overrides) -> LinkConfig:
    """Baseline for the gain-bandwidth study: unity-gain calibrated front
    end, 1 mV threshold with 25% hysteresis."""
    base = dict(
        link=LinkParams(wavelength=620e-9, pde=0.036, data_rate=1e6,
                        dark_count_rate=30e3,
                        avg_optical_power=dbm_to_watts(-74.0)),
        sipm=calibrated_sipm_params(),
        amp=AmplifierConfig(gain=1.0, bandwidth=450e6),
        noise=NoiseConfig(input_psd=DEFAULT_INPUT_NOISE_PSD),
        comparator=ComparatorConfig(
            v_th=GBP_STUDY_VTH,
            hysteresis=GBP_STUDY_HYSTERESIS_FRACTION * GBP_STUDY_VTH),
        mode=MODE_WAVEFORM,
        min_pulse_width=0.0,
    )
    base.update(overrides)
    return LinkConfig(**base)


def config_to_dict(cfg: LinkConfig) -> dict:
    out = asdict(cfg)
    out["prbs"]["taps"] = list(cfg.prbs.taps)
    return out


def config_from_dict(data: dict) -> LinkConfig:
    data = dict(data)
    data["link"] = LinkParams(**data["link"])
    data["sipm"] = SiPMParams(**data["sipm"])
    data["amp"] = AmplifierConfig(**data["amp"])
    data["noise"] = NoiseConfig(**data["noise"])
    data["comparator"] = ComparatorConfig(**data["comparator"])
    if "prbs" in data:
        prbs = dict(data["prbs"])
        if "taps" in prbs:
            prbs["taps"] = tuple(prbs["taps"])
        data["prbs"] = LfsrConfig(**prbs)
    if data.get("budget_override") is not None:
        data["budget_override"] = PhotonBudget(**data["budget_override"])
    return LinkConfig(**data)


def load_config(path, **overrides) -> LinkConfig:
    with open(path) as fh:
        data = json.load(fh)
    data.update(overrides)
    return config_from_dict(data)


def write_csv(path, header, rows) -> None:
    """Deterministic CSV: fixed %.12g float formatting, \\n newlines."""
    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return format(float(value), ".12g")

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
