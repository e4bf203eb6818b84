"""Waveform I/O: CSV and a little-endian binary frame.

Binary layout: sample_rate as float64, sample count as uint64, then the
samples as float32, all little-endian.  The frame does not carry t0;
loaded waveforms start at t = 0.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .sipm import Waveform

_HEADER = struct.Struct("<dQ")
CSV_HEADER = "time_s,volts"


def save_waveform_csv(waveform: Waveform, path) -> None:
    t = waveform.times()
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for ti, vi in zip(t, waveform.samples):
            fh.write(f"{ti:.12g},{vi:.12g}\n")


def load_waveform_csv(path) -> Waveform:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise ValueError(f"{path}: expected two columns and >= 2 rows")
    t, v = data[:, 0], data[:, 1]
    steps = np.diff(t)
    dt = steps.mean()
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-6 * dt):
        raise ValueError(f"{path}: time axis is not uniformly sampled")
    return Waveform(v, sample_rate=1.0 / dt, t0=float(t[0])).validate()


def save_waveform_bin(waveform: Waveform, path) -> None:
    samples = np.asarray(waveform.samples, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(float(waveform.sample_rate), samples.size))
        fh.write(samples.tobytes())


def load_waveform_bin(path) -> Waveform:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    sample_rate, count = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 4 * count
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(raw)}")
    samples = np.frombuffer(raw, dtype="<f4", count=count, offset=_HEADER.size)
    return Waveform(samples.astype(np.float32), sample_rate).validate()
