"""Post-SiPM analog chain.

Gain, a single-pole (first-order Butterworth) bandwidth limit under a
gain-bandwidth-product budget, additive readout noise, AC coupling, a
hysteresis comparator that turns the analog trace into a digital pulse
train, and the minimum-pulse-width limit of the digital interface.

Chain order is fixed: gain -> low-pass -> (optional DC block) -> noise.
Noise is referred to the filter output: sigma = input_psd * sqrt(f3dB) *
gain, so lowering the bandwidth lowers the noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .events import _as_rng
from .sipm import Waveform

# documented comparator threshold floor (typical input offset of commercial
# parts); informational, not enforced
MIN_COMPARATOR_VTH = 1e-3

DEFAULT_MIN_PULSE_WIDTH = 5e-9


@dataclass(frozen=True)
class AmplifierConfig:
    """Single-pole amplifier: linear voltage gain and -3 dB bandwidth.

    The gain-bandwidth product is derived; passing gbp explicitly asserts
    the budget and must match gain * bandwidth.
    """

    gain: float
    bandwidth: float
    gbp: float | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.gain) and self.gain >= 1.0):
            raise ValueError(f"gain must be >= 1, got {self.gain!r}")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth!r}")
        derived = self.gain * self.bandwidth
        if self.gbp is None:
            object.__setattr__(self, "gbp", derived)
        elif abs(self.gbp - derived) > 1e-9 * derived:
            raise ValueError(
                f"declared GBP {self.gbp!r} != gain*bandwidth {derived!r}")


@dataclass(frozen=True)
class NoiseConfig:
    """White input-referred noise density (V/sqrt(Hz)) and its seed."""

    input_psd: float
    seed: int | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.input_psd) and self.input_psd >= 0):
            raise ValueError(f"input_psd must be >= 0, got {self.input_psd!r}")


@dataclass(frozen=True)
class ComparatorConfig:
    """Hysteresis comparator: trips high above v_th, releases below
    v_th - hysteresis."""

    v_th: float
    hysteresis: float
    min_input_amplitude: float = MIN_COMPARATOR_VTH

    def __post_init__(self) -> None:
        if not (self.v_th > self.hysteresis >= 0):
            raise ValueError(
                f"need v_th > hysteresis >= 0, got {self.v_th!r}, {self.hysteresis!r}")

    @property
    def v_thu(self) -> float:
        return self.v_th

    @property
    def v_thl(self) -> float:
        return self.v_th - self.hysteresis


@dataclass(eq=False)
class DigitalPulseTrain:
    """Alternating rising/falling edge timestamps from the comparator."""

    rises: np.ndarray
    falls: np.ndarray

    def __post_init__(self) -> None:
        self.rises = np.asarray(self.rises, dtype=np.float64)
        self.falls = np.asarray(self.falls, dtype=np.float64)
        nr, nf = self.rises.size, self.falls.size
        if nr - nf not in (0, 1):
            raise ValueError(f"got {nr} rises but {nf} falls")
        if nf:
            if np.any(self.falls <= self.rises[:nf]):
                raise ValueError("every fall must come after its rise")
            if np.any(self.rises[1:nf + 1] <= self.falls[:nr - 1]):
                raise ValueError("rises and falls must alternate")

    @property
    def n_pulses(self) -> int:
        return int(self.rises.size)

    def widths(self) -> np.ndarray:
        """Widths of the closed pulses (a trailing open pulse has none)."""
        return self.falls - self.rises[:self.falls.size]


def lpf_alpha(fc: float, sample_rate: float) -> float:
    """Discrete one-pole coefficient for cutoff fc (impulse-invariant)."""
    if not (0.0 < fc < sample_rate / 2.0):
        raise ValueError(
            f"cutoff must be in (0, sample_rate/2), got {fc!r} at {sample_rate!r}")
    return 1.0 - math.exp(-2.0 * math.pi * fc / sample_rate)


def first_order_lpf(waveform: Waveform, fc: float) -> Waveform:
    """Unity-DC-gain single-pole low-pass (first-order Butterworth)."""
    alpha = lpf_alpha(fc, waveform.sample_rate)
    y, _ = _kernels.single_pole(waveform.samples, alpha, 0.0)
    return Waveform(y, waveform.sample_rate, waveform.t0)


def apply_gain(waveform: Waveform, gain: float) -> Waveform:
    if not (np.isfinite(gain) and gain > 0):
        raise ValueError(f"gain must be > 0, got {gain!r}")
    return Waveform(waveform.samples * gain, waveform.sample_rate, waveform.t0)


def noise_sigma(cfg: NoiseConfig, effective_bandwidth: float, gain: float = 1.0) -> float:
    if not (np.isfinite(effective_bandwidth) and effective_bandwidth > 0):
        raise ValueError(
            f"effective_bandwidth must be > 0, got {effective_bandwidth!r}")
    return cfg.input_psd * math.sqrt(effective_bandwidth) * gain


def add_noise(waveform: Waveform, cfg: NoiseConfig, effective_bandwidth: float,
              gain: float = 1.0, rng=None) -> Waveform:
    """Add i.i.d. zero-mean Gaussian samples at the output-referred sigma."""
    sigma = noise_sigma(cfg, effective_bandwidth, gain)
    if sigma == 0.0:
        return Waveform(waveform.samples.copy(), waveform.sample_rate, waveform.t0)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    else:
        rng = _as_rng(rng)
    dtype = np.float32 if waveform.samples.dtype == np.float32 else np.float64
    noise = rng.standard_normal(len(waveform), dtype=dtype)
    noise *= dtype(sigma)
    noise += waveform.samples
    return Waveform(noise, waveform.sample_rate, waveform.t0)


def dc_block(waveform: Waveform, fc_hp: float) -> Waveform:
    """First-order high-pass (complement of the one-pole low-pass).

    Removes slow baseline shift so pile-up at high count rates oscillates
    around 0 V instead of walking off the comparator window.
    """
    alpha = lpf_alpha(fc_hp, waveform.sample_rate)
    baseline, _ = _kernels.single_pole(waveform.samples, alpha, 0.0)
    return Waveform(waveform.samples - baseline, waveform.sample_rate, waveform.t0)


def gbp_chain(waveform: Waveform, amp: AmplifierConfig, noise: NoiseConfig,
              rng=None) -> Waveform:
    """Full analog chain: gain, bandwidth limit, then output-referred noise."""
    if not amp.bandwidth < waveform.sample_rate / 2.0:
        raise ValueError(
            f"bandwidth {amp.bandwidth:g} must be < sample_rate/2 "
            f"({waveform.sample_rate / 2.0:g})")
    out = apply_gain(waveform, amp.gain)
    out = first_order_lpf(out, amp.bandwidth)
    return add_noise(out, noise, amp.bandwidth, amp.gain, rng=rng)


def comparator(waveform: Waveform, cfg: ComparatorConfig) -> DigitalPulseTrain:
    """Convert an analog trace into digital edges with hysteresis.

    Initial state is LOW; edge timestamps are the times of the samples
    that crossed the corresponding threshold.
    """
    rise_idx, fall_idx, _ = _kernels.hysteresis_edges(
        waveform.samples, waveform.samples.dtype.type(cfg.v_thu),
        waveform.samples.dtype.type(cfg.v_thl), False)
    dt = waveform.dt
    return DigitalPulseTrain(waveform.t0 + rise_idx * dt,
                             waveform.t0 + fall_idx * dt)


def min_width_filter(train: DigitalPulseTrain,
                     min_width: float = DEFAULT_MIN_PULSE_WIDTH) -> DigitalPulseTrain:
    """Drop closed pulses narrower than min_width.

    Models the shortest pulse the digital interface can register.  A
    trailing open pulse (rise without a fall yet) is kept as-is.
    """
    if min_width < 0:
        raise ValueError(f"min_width must be >= 0, got {min_width!r}")
    if min_width == 0.0 or train.n_pulses == 0:
        return train
    nf = train.falls.size
    keep = (train.falls - train.rises[:nf]) >= min_width
    rises = train.rises[:nf][keep]
    falls = train.falls[keep]
    if train.rises.size > nf:  # open pulse at the end of the capture
        rises = np.append(rises, train.rises[-1])
    return DigitalPulseTrain(rises, falls)


def threshold_sweep(waveform: Waveform, v_th_grid, *,
                    hysteresis: float | None = None,
                    hysteresis_fraction: float | None = None,
                    min_width: float = 0.0):
    """Pulse count rate versus comparator threshold.

    The hysteresis rule is either a fixed voltage (offline processing,
    5 mV) or a fraction of each threshold (25% in the gain-bandwidth
    study); exactly one must be given.  Returns (v_th, counts_per_second)
    rows evaluated on the same waveform.
    """
    grid = np.asarray(v_th_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) < 0):
        raise ValueError("v_th_grid must be non-empty and sorted ascending")
    if (hysteresis is None) == (hysteresis_fraction is None):
        raise ValueError("give exactly one of hysteresis / hysteresis_fraction")
    duration = waveform.duration
    rows = []
    for v_th in grid:
        hyst = hysteresis if hysteresis is not None else hysteresis_fraction * v_th
        cfg = ComparatorConfig(v_th=float(v_th), hysteresis=float(hyst))
        train = min_width_filter(comparator(waveform, cfg), min_width)
        rows.append((float(v_th), train.n_pulses / duration))
    return rows
