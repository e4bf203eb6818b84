"""Detected-photon event streams.

Generates the Poisson arrival processes behind the link simulation:
dark/background counts as a homogeneous process and OOK signal light as a
piecewise-homogeneous process that is only active during 1-bits.

All randomness comes from numpy's PCG64.  A master 64-bit seed is split
into independent, reproducible sub-streams with SeedSequence, so the
signal, dark, microcell, amplitude and noise draws never interact; see
substream().
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# fixed sub-stream tags of the master seed (documented; do not reorder)
STREAM_SIGNAL = 1
STREAM_DARK = 2
STREAM_MICROCELL = 3
STREAM_AMPLITUDE = 4
STREAM_NOISE = 5
STREAM_IDEAL_COUNTS = 6

_MASK64 = (1 << 64) - 1

RngSeed = int


def substream(seed: RngSeed, *path: int) -> np.random.Generator:
    """PCG64 generator for a named sub-stream of a master seed.

    Identical (seed, path) always yields the identical stream; distinct
    paths are statistically independent.
    """
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, *path]))


def derive_seed(seed: RngSeed, *path: int) -> int:
    """A fresh 64-bit master seed derived from (seed, path).

    Used to give each point of a parameter sweep its own independent
    stream family while staying reproducible from one top-level seed.
    """
    ss = np.random.SeedSequence([seed & _MASK64, *path])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(int(seed_or_rng) & _MASK64)


@dataclass(eq=False)
class EventTimes:
    """Sorted event timestamps (seconds) on [0, duration)."""

    times: np.ndarray
    duration: float

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be > 0, got {self.duration!r}")
        if self.times.size:
            if np.any(np.diff(self.times) < 0):
                raise ValueError("event times must be non-decreasing")
            if self.times[0] < 0 or self.times[-1] >= self.duration:
                raise ValueError("event times must lie in [0, duration)")

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(eq=False)
class BitStream:
    """A binary sequence and the duration of one bit slot."""

    bits: np.ndarray
    bit_time: float

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.size == 0:
            raise ValueError("bit stream must be non-empty")
        if not (np.isfinite(self.bit_time) and self.bit_time > 0):
            raise ValueError(f"bit_time must be > 0, got {self.bit_time!r}")
        if np.any(self.bits > 1):
            raise ValueError("bits must be 0 or 1")

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def duration(self) -> float:
        return self.bits.size * self.bit_time


def homogeneous_poisson(rate: float, duration: float, seed_or_rng) -> EventTimes:
    """Homogeneous Poisson process: i.i.d. exponential inter-arrival times."""
    if not (np.isfinite(rate) and rate >= 0):
        raise ValueError(f"rate must be finite and >= 0, got {rate!r}")
    if not (np.isfinite(duration) and duration > 0):
        raise ValueError(f"duration must be > 0, got {duration!r}")
    rng = _as_rng(seed_or_rng)
    if rate == 0.0:
        return EventTimes(np.empty(0), duration)

    blocks = []
    t_last = 0.0
    expected_left = rate * duration
    while True:
        block = max(64, int(expected_left + 6.0 * np.sqrt(expected_left + 1.0)))
        gaps = rng.exponential(1.0 / rate, block)
        times = t_last + np.cumsum(gaps)
        blocks.append(times)
        if times[-1] >= duration:
            break
        t_last = times[-1]
        expected_left = rate * (duration - t_last)
    times = np.concatenate(blocks)
    return EventTimes(times[times < duration], duration)


def ook_signal_events(bits: BitStream, detected_rate_peak: float,
                      seed_or_rng) -> EventTimes:
    """Signal photon arrivals for an OOK-modulated source.

    Piecewise-homogeneous Poisson process: rate detected_rate_peak inside
    1-bit slots and zero inside 0-bit slots.
    """
    if not (np.isfinite(detected_rate_peak) and detected_rate_peak >= 0):
        raise ValueError(
            f"detected_rate_peak must be finite and >= 0, got {detected_rate_peak!r}")
    rng = _as_rng(seed_or_rng)
    duration = bits.duration
    ones = np.flatnonzero(bits.bits)
    if detected_rate_peak == 0.0 or ones.size == 0:
        return EventTimes(np.empty(0), duration)

    mu = detected_rate_peak * bits.bit_time
    counts = rng.poisson(mu, ones.size)
    starts = np.repeat(ones.astype(np.float64) * bits.bit_time, counts)
    times = starts + rng.random(counts.sum()) * bits.bit_time
    times.sort()
    # float rounding can nudge an arrival onto the closing boundary
    np.clip(times, 0.0, np.nextafter(duration, 0.0), out=times)
    return EventTimes(times, duration)


def merge(a: EventTimes, b: EventTimes) -> EventTimes:
    """Superpose two event streams over the same time window."""
    if a.duration != b.duration:
        raise ValueError(
            f"cannot merge streams with durations {a.duration!r} and {b.duration!r}")
    times = np.concatenate([a.times, b.times])
    times.sort()
    return EventTimes(times, a.duration)
