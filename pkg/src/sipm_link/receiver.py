"""Digital receiver logic.

PRBS transmitter (Fibonacci LFSR), asynchronous rising-edge counting with
two interleaved per-bit counters (so counting never pauses at a bit
boundary), integer-threshold bit decisions and BER accounting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analog import DigitalPulseTrain
from .events import BitStream

DEFAULT_LFSR_WIDTH = 15
DEFAULT_LFSR_TAPS = (15, 14)  # x^15 + x^14 + 1, maximal length


@dataclass(frozen=True)
class LfsrConfig:
    """Fibonacci LFSR: register width, feedback taps (1-based, tap `width`
    is the register MSB) and a nonzero start state.

    Only the default taps are guaranteed to come from a primitive
    polynomial (period 2^width - 1).
    """

    width: int = DEFAULT_LFSR_WIDTH
    taps: tuple[int, ...] = DEFAULT_LFSR_TAPS
    seed: int = 1

    def __post_init__(self) -> None:
        if self.width < 2:
            raise ValueError(f"width must be >= 2, got {self.width!r}")
        if not self.taps or any(not 1 <= t <= self.width for t in self.taps):
            raise ValueError(f"taps must be within 1..width, got {self.taps!r}")
        if not 0 < self.seed < (1 << self.width):
            raise ValueError(
                f"seed must be a nonzero {self.width}-bit value, got {self.seed!r}")


@dataclass(eq=False)
class BitWindowCounts:
    """Rising-edge count per bit window."""

    counts: np.ndarray
    bit_time: float

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if not self.bit_time > 0:
            raise ValueError(f"bit_time must be > 0, got {self.bit_time!r}")

    def __len__(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class BerReport:
    n_bits: int
    n_errors: int
    ber: float
    n_t: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.n_errors <= self.n_bits:
            raise ValueError(
                f"n_errors must be in [0, n_bits], got {self.n_errors!r}/{self.n_bits!r}")


def lfsr_prbs(cfg: LfsrConfig, n_bits: int, bit_time: float = 1.0) -> BitStream:
    """Pseudo-random bit stream from a Fibonacci LFSR.

    The output bit is the feedback (XOR of the tapped register bits).  The
    register cycle is detected once and tiled, so long streams cost one
    period of state stepping.
    """
    if n_bits < 1:
        raise ValueError(f"n_bits must be >= 1, got {n_bits!r}")
    mask = (1 << cfg.width) - 1
    shifts = [t - 1 for t in cfg.taps]
    state = cfg.seed
    out = []
    for _ in range(min(n_bits, mask + 1)):
        fb = 0
        for s in shifts:
            fb ^= state >> s
        fb &= 1
        out.append(fb)
        state = ((state << 1) | fb) & mask
        if state == cfg.seed:
            break
    period = np.asarray(out, dtype=np.uint8)
    if period.size >= n_bits:
        bits = period[:n_bits]
    else:
        reps = -(-n_bits // period.size)
        bits = np.tile(period, reps)[:n_bits]
    return BitStream(bits, bit_time)


def interleaved_count(train: DigitalPulseTrain, bit_time: float,
                      n_bits: int) -> BitWindowCounts:
    """Per-bit rising-edge counts from the interleaved counter pair.

    While one counter accumulates edges of the current bit, the other
    latches the previous bit's count and resets, so no edge is ever missed
    at a boundary.  An edge exactly on a boundary belongs to the later bit.
    """
    if n_bits < 1:
        raise ValueError(f"n_bits must be >= 1, got {n_bits!r}")
    if not bit_time > 0:
        raise ValueError(f"bit_time must be > 0, got {bit_time!r}")
    rises = train.rises
    if rises.size and (rises[0] < 0 or rises[-1] >= n_bits * bit_time):
        raise ValueError("pulse train extends beyond the bit window")
    counts = _kernels.interleaved_bit_counts(rises, float(bit_time), int(n_bits))
    return BitWindowCounts(counts, bit_time)


def decide(counts: BitWindowCounts, n_t: int) -> BitStream:
    """Threshold decision: bit = 1 iff the window count strictly exceeds n_t."""
    if n_t < 0:
        raise ValueError(f"n_t must be >= 0, got {n_t!r}")
    return BitStream((counts.counts > n_t).astype(np.uint8), counts.bit_time)


def ber_measure(tx: BitStream, rx: BitStream, n_t: int | None = None) -> BerReport:
    """Bit error ratio from an XOR comparison of the two streams."""
    if len(tx) != len(rx):
        raise ValueError(f"length mismatch: tx {len(tx)}, rx {len(rx)}")
    n_errors = int(np.count_nonzero(tx.bits ^ rx.bits))
    return BerReport(n_bits=len(tx), n_errors=n_errors,
                     ber=n_errors / len(tx), n_t=n_t)


def bathtub(counts: BitWindowCounts, tx: BitStream,
            n_t_grid=range(16)) -> tuple[list[BerReport], BerReport]:
    """BER versus decision threshold, plus the best-performing report.

    Ties on BER go to the smaller threshold.
    """
    if len(counts) != len(tx):
        raise ValueError(
            f"length mismatch: counts {len(counts)}, tx {len(tx)}")
    rows = []
    for n_t in n_t_grid:
        rows.append(ber_measure(tx, decide(counts, int(n_t)), n_t=int(n_t)))
    if not rows:
        raise ValueError("n_t_grid must be non-empty")
    best = min(rows, key=lambda r: (r.ber, r.n_t))
    return rows, best
