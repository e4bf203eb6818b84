"""Compiled inner loops for the waveform pipeline.

Everything here is a plain sequential state machine; numba only makes it
fast enough to push ~1e9 samples through the chain in seconds.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def single_pole(x, alpha, state):
    """One-pole IIR low-pass: y[i] = y[i-1] + alpha * (x[i] - y[i-1]).

    Returns the filtered array and the final state so chunked runs can
    continue exactly where the previous chunk stopped.
    """
    y = np.empty_like(x)
    s = state
    for i in range(x.size):
        s += alpha * (x[i] - s)
        y[i] = s
    return y, s


@njit(cache=True)
def single_pole_inplace(x, alpha, state):
    """In-place variant of single_pole; returns only the final state."""
    s = state
    for i in range(x.size):
        s += alpha * (x[i] - s)
        x[i] = s
    return s


@njit(cache=True)
def highpass_inplace(x, alpha, state):
    """In-place DC block: x -= one-pole low-pass of x.  Returns the final
    low-pass state."""
    s = state
    for i in range(x.size):
        s += alpha * (x[i] - s)
        x[i] -= s
    return s


@njit(cache=True)
def hysteresis_edges(x, v_thu, v_thl, high):
    """Two-state comparator over samples.

    LOW -> HIGH when a sample exceeds v_thu, HIGH -> LOW when a sample
    drops below v_thl.  Returns the sample indices of the transitions and
    the final state (for chunked processing).
    """
    cap = x.size // 2 + 1
    rises = np.empty(cap, dtype=np.int64)
    falls = np.empty(cap, dtype=np.int64)
    nr = 0
    nf = 0
    for i in range(x.size):
        if high:
            if x[i] < v_thl:
                falls[nf] = i
                nf += 1
                high = False
        else:
            if x[i] > v_thu:
                rises[nr] = i
                nr += 1
                high = True
    return rises[:nr], falls[:nf], high


@njit(cache=True)
def dead_time_keep(times, cells, n_cells, recovery):
    """Non-paralyzable per-cell dead time.

    An event is kept unless its cell produced a *kept* event less than
    `recovery` ago; dropped events do not extend the dead window.
    `cells` must already be compacted to 0..n_cells-1.
    """
    last = np.full(n_cells, -np.inf)
    keep = np.zeros(times.size, dtype=np.bool_)
    for i in range(times.size):
        c = cells[i]
        if times[i] - last[c] >= recovery:
            keep[i] = True
            last[c] = times[i]
    return keep


@njit(cache=True)
def render_pulses(canvas, times, amps, sample_offset, dt, inv_tau_fall,
                  inv_tau_rise, inv_norm, n_window):
    """Add one double-exponential pulse per event onto the sample canvas.

    Each event contributes amps[e] * (exp(-t/tau_fall) - exp(-t/tau_rise))
    / norm for t >= 0, evaluated on the global sample grid and truncated
    n_window samples after the event.  The canvas covers global samples
    [sample_offset, sample_offset + len); all time arithmetic uses global
    indices so chunked rendering reproduces a monolithic run bit for bit.
    """
    n = canvas.size
    for e in range(times.size):
        te = times[e]
        a = amps[e] * inv_norm
        g0 = int(np.ceil(te / dt))  # first global sample at/after the event
        j = g0 - sample_offset
        j_end = j + n_window
        if j < 0:
            j = 0
        if j_end > n:
            j_end = n
        while j < j_end:
            t = (sample_offset + j) * dt - te
            if t >= 0.0:
                canvas[j] += a * (np.exp(-t * inv_tau_fall) - np.exp(-t * inv_tau_rise))
            j += 1
    return canvas


@njit(cache=True)
def interleaved_bit_counts(rises, bit_time, n_bits):
    """Two interleaved rising-edge counters with per-bit latching.

    The active counter increments on each rising edge; at every bit
    boundary the roles swap, the retiring counter latches its value into
    the output and resets.  An edge exactly on a boundary belongs to the
    later bit.
    """
    counts = np.zeros(n_bits, dtype=np.int64)
    counter_a = 0
    counter_b = 0
    a_active = True
    i = 0
    for k in range(n_bits):
        end = (k + 1) * bit_time
        while i < rises.size and rises[i] < end:
            if a_active:
                counter_a += 1
            else:
                counter_b += 1
            i += 1
        if a_active:
            counts[k] = counter_a
            counter_a = 0
        else:
            counts[k] = counter_b
            counter_b = 0
        a_active = not a_active
    return counts
