"""SiPM front end: microcell dead time and analog pulse synthesis.

Detected avalanches are assigned to microcells at random; a cell that
fired less than one recovery time ago swallows the event (non-paralyzable
dead time).  Surviving events are rendered as double-exponential
single-photon pulses and summed into a voltage waveform.

The pulse template is A * (exp(-t/tau_fall) - exp(-t/tau_rise)) / norm,
normalized so its peak equals the configured single-photon amplitude.
tau_fall is calibrated once by bisection so the rendered pulse has an
8 ns full width at half maximum; tau_rise stays at 1 ns.

The default single-photon amplitude (0.24 mV at the SiPM pin) and the
default noise density in the analog chain are calibration targets chosen
so that a 1 mV comparator threshold separates the gain-bandwidth operating
regimes the way the hardware does; they are not measured device values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .events import EventTimes, _as_rng

DEFAULT_N_MICROCELLS = 2880
DEFAULT_RECOVERY_TIME = 30e-9
DEFAULT_SINGLE_PE_AMPLITUDE = 0.24e-3
DEFAULT_TAU_RISE = 1e-9
DEFAULT_TAU_FALL = 10e-9
DEFAULT_AMPLITUDE_SIGMA = 0.05
TARGET_FWHM = 8e-9

# waveform grids must resolve the pulse rise: at least one sample per tau_rise
MIN_SAMPLES_PER_TAU_RISE = 1.0

# render pulses until the tail falls below this fraction of the peak
_TAIL_CUTOFF = 1e-7


class MeasurementError(RuntimeError):
    """A waveform measurement could not be taken."""


@dataclass(frozen=True)
class SiPMParams:
    n_microcells: int = DEFAULT_N_MICROCELLS
    recovery_time: float = DEFAULT_RECOVERY_TIME
    single_pe_amplitude: float = DEFAULT_SINGLE_PE_AMPLITUDE
    tau_rise: float = DEFAULT_TAU_RISE
    tau_fall: float = DEFAULT_TAU_FALL
    amplitude_sigma: float = DEFAULT_AMPLITUDE_SIGMA

    def __post_init__(self) -> None:
        if self.n_microcells < 1:
            raise ValueError(f"n_microcells must be >= 1, got {self.n_microcells!r}")
        if not (np.isfinite(self.recovery_time) and self.recovery_time > 0):
            raise ValueError(f"recovery_time must be > 0, got {self.recovery_time!r}")
        if not (0 < self.tau_rise < self.tau_fall):
            raise ValueError(
                f"need tau_fall > tau_rise > 0, got {self.tau_rise!r}, {self.tau_fall!r}")
        if self.single_pe_amplitude <= 0:
            raise ValueError("single_pe_amplitude must be > 0")
        if self.amplitude_sigma < 0:
            raise ValueError("amplitude_sigma must be >= 0")


@dataclass(frozen=True)
class PulseTemplate:
    """Double-exponential single-photon pulse shape with unit-peak norm."""

    amplitude: float
    tau_rise: float
    tau_fall: float

    def __post_init__(self) -> None:
        if not (0 < self.tau_rise < self.tau_fall):
            raise ValueError(
                f"need tau_fall > tau_rise > 0, got {self.tau_rise!r}, {self.tau_fall!r}")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be > 0")

    @property
    def t_peak(self) -> float:
        r, f = self.tau_rise, self.tau_fall
        return math.log(f / r) * r * f / (f - r)

    @property
    def peak_norm(self) -> float:
        t = self.t_peak
        return math.exp(-t / self.tau_fall) - math.exp(-t / self.tau_rise)

    def shape(self, t) -> np.ndarray:
        """Pulse voltage at time t (seconds) after the event; 0 for t < 0."""
        t = np.asarray(t, dtype=np.float64)
        out = np.exp(-t / self.tau_fall) - np.exp(-t / self.tau_rise)
        out *= self.amplitude / self.peak_norm
        return np.where(t >= 0.0, out, 0.0)

    def tail_time(self, cutoff: float = _TAIL_CUTOFF) -> float:
        """Time after which the pulse stays below cutoff * amplitude."""
        return self.tau_fall * math.log(1.0 / (cutoff * self.peak_norm))

    @classmethod
    def from_params(cls, params: SiPMParams) -> "PulseTemplate":
        return cls(amplitude=params.single_pe_amplitude,
                   tau_rise=params.tau_rise, tau_fall=params.tau_fall)


@dataclass(eq=False)
class Waveform:
    """Uniformly sampled voltage trace."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples)
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate!r}")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def validate(self) -> "Waveform":
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")
        return self


def microcell_filter(events: EventTimes, params: SiPMParams,
                     seed_or_rng) -> EventTimes:
    """Drop events landing on a microcell still recovering from a hit.

    Each event is assigned to a cell uniformly at random; per cell the
    dead time is non-paralyzable (a swallowed event does not restart the
    dead window).
    """
    rng = _as_rng(seed_or_rng)
    if len(events) == 0:
        return events
    cells = rng.integers(0, params.n_microcells, size=len(events))
    # only cells that are actually hit need state, so n_microcells can be huge
    _, compact = np.unique(cells, return_inverse=True)
    keep = _kernels.dead_time_keep(events.times, compact.astype(np.int64),
                                   int(compact.max()) + 1, params.recovery_time)
    return EventTimes(events.times[keep], events.duration)


def synth_waveform(events: EventTimes, template: PulseTemplate,
                   sample_rate: float, duration: float,
                   amplitude_scale: np.ndarray | None = None,
                   dtype=np.float64) -> Waveform:
    """Superpose one pulse per event onto a uniform sample grid.

    samples[i] = sum_e scale_e * shape(i/sample_rate - t_e).  Events closer
    than one sample period simply accumulate.  amplitude_scale optionally
    gives a per-event relative amplitude (default 1), which is how
    single-photon gain dispersion enters the pipeline.
    """
    if sample_rate * template.tau_rise < MIN_SAMPLES_PER_TAU_RISE:
        raise ValueError(
            f"sample_rate {sample_rate:g} cannot resolve tau_rise "
            f"{template.tau_rise:g}; need >= {MIN_SAMPLES_PER_TAU_RISE / template.tau_rise:g}")
    n = int(round(duration * sample_rate))
    if n <= 0:
        raise ValueError("duration too short for the sample rate")
    canvas = np.zeros(n, dtype=dtype)
    if len(events) == 0:
        return Waveform(canvas, sample_rate)
    if amplitude_scale is None:
        amps = np.full(len(events), template.amplitude)
    else:
        amps = np.asarray(amplitude_scale, dtype=np.float64) * template.amplitude
        if amps.shape != (len(events),):
            raise ValueError("amplitude_scale must have one entry per event")
    n_window = int(math.ceil(template.tail_time() * sample_rate)) + 2
    _kernels.render_pulses(canvas, events.times, amps, 0, 1.0 / sample_rate,
                           1.0 / template.tau_fall, 1.0 / template.tau_rise,
                           1.0 / template.peak_norm, n_window)
    return Waveform(canvas, sample_rate)


def draw_amplitude_scales(n: int, params: SiPMParams, seed_or_rng) -> np.ndarray:
    """Per-event relative amplitudes, normal around 1 with the configured
    dispersion."""
    rng = _as_rng(seed_or_rng)
    if params.amplitude_sigma == 0.0:
        return np.ones(n)
    return 1.0 + params.amplitude_sigma * rng.standard_normal(n)


def measure_fwhm(waveform: Waveform) -> float:
    """Full width at half maximum of a single pulse, by linear interpolation.

    The waveform must contain exactly one contiguous region above half of
    its global maximum; anything else (flat trace, multiple pulses) raises
    MeasurementError.
    """
    y = np.asarray(waveform.samples, dtype=np.float64)
    if y.size < 3:
        raise MeasurementError("waveform too short to measure")
    peak = y.max()
    if not np.isfinite(peak) or peak <= 0 or peak == y.min():
        raise MeasurementError("waveform has no pulse")
    half = 0.5 * peak
    above = y > half
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    # exactly one rising and one falling half-crossing
    if above[0] or above[-1] or edges.size != 2:
        raise MeasurementError(
            f"expected exactly one pulse above half maximum, found {edges.size} crossings")
    i0, i1 = edges  # last below-half sample before the pulse, last above-half inside
    dt = waveform.dt
    t_up = (i0 + (half - y[i0]) / (y[i0 + 1] - y[i0])) * dt
    t_dn = (i1 + (y[i1] - half) / (y[i1] - y[i1 + 1])) * dt
    return t_dn - t_up


def template_fwhm(template: PulseTemplate, sample_rate: float = 1e11) -> float:
    """FWHM of the rendered template at high resolution."""
    span = template.t_peak + template.tau_fall * 12.0
    t = np.arange(int(span * sample_rate)) / sample_rate
    lead = int(0.2e-9 * sample_rate) + 2  # keep the first sample below half-max
    y = np.zeros(t.size + 2 * lead)
    y[lead:-lead] = template.shape(t)
    return measure_fwhm(Waveform(y, sample_rate))


def calibrate_tau_fall(target_fwhm: float = TARGET_FWHM,
                       tau_rise: float = DEFAULT_TAU_RISE,
                       tol: float = 1e-12) -> float:
    """Bisect tau_fall so the template FWHM hits the target width."""
    lo = tau_rise * 1.01
    hi = tau_rise + 10.0 * target_fwhm
    probe = lambda tf: template_fwhm(PulseTemplate(1.0, tau_rise, tf))
    if not (probe(lo) < target_fwhm < probe(hi)):
        raise ValueError(f"target FWHM {target_fwhm:g} not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) < target_fwhm:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=8)
def calibrated_tau_fall(target_fwhm: float = TARGET_FWHM,
                        tau_rise: float = DEFAULT_TAU_RISE) -> float:
    return calibrate_tau_fall(target_fwhm, tau_rise)


def calibrated_sipm_params(**overrides) -> SiPMParams:
    """Default SiPM parameters with tau_fall calibrated for an 8 ns FWHM."""
    overrides.setdefault("tau_fall", calibrated_tau_fall())
    return SiPMParams(**overrides)
