"""Closed-form Poisson statistics for a photon-counting OOK link.

Detection efficiency, detected photons per bit, error probability of an
integer-threshold receiver, and the optical power needed to hold a target
error rate against background counts.

Decision convention used throughout: a bit is decided 1 when the per-bit
count strictly exceeds the integer threshold n_t, so

    pe = 1/2 * P[Poisson(ls + lb) <= n_t] + 1/2 * P[Poisson(lb) > n_t]

for equiprobable OOK with ls detected signal and lb detected background
photons per bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK_CONSTANT
from scipy.special import pdtr, pdtrc


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its target."""


def _require_fraction(name: str, value: float) -> None:
    if not (np.isfinite(value) and 0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be a fraction in [0, 1], got {value!r}")


def _require_nonnegative(name: str, value: float) -> None:
    if not (np.isfinite(value) and value >= 0.0):
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class PdeModel:
    """Factors of the photon detection efficiency.

    quantum_efficiency and avalanche_init_prob are device/bias dependent
    fractions; fill_factor is the geometric fraction of active area.
    """

    quantum_efficiency: float
    avalanche_init_prob: float
    fill_factor: float

    def __post_init__(self) -> None:
        _require_fraction("quantum_efficiency", self.quantum_efficiency)
        _require_fraction("avalanche_init_prob", self.avalanche_init_prob)
        _require_fraction("fill_factor", self.fill_factor)


@dataclass(frozen=True)
class PhotonBudget:
    """Expected detected photons per bit: signal (lambda_s) and background
    (lambda_b)."""

    lambda_s: float
    lambda_b: float

    def __post_init__(self) -> None:
        _require_nonnegative("lambda_s", self.lambda_s)
        _require_nonnegative("lambda_b", self.lambda_b)


@dataclass(frozen=True)
class LinkParams:
    """Optical link operating point.

    Powers are time-averaged over equiprobable OOK; the transmitted peak
    power during 1-bits is avg_optical_power / ook_duty.
    """

    wavelength: float
    pde: float
    data_rate: float
    dark_count_rate: float
    avg_optical_power: float
    ook_duty: float = 0.5

    def __post_init__(self) -> None:
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be > 0, got {self.wavelength!r}")
        _require_fraction("pde", self.pde)
        if not (np.isfinite(self.data_rate) and self.data_rate > 0):
            raise ValueError(f"data_rate must be > 0, got {self.data_rate!r}")
        _require_nonnegative("dark_count_rate", self.dark_count_rate)
        _require_nonnegative("avg_optical_power", self.avg_optical_power)
        if not (np.isfinite(self.ook_duty) and 0.0 < self.ook_duty <= 1.0):
            raise ValueError(f"ook_duty must be in (0, 1], got {self.ook_duty!r}")

    @property
    def bit_time(self) -> float:
        return 1.0 / self.data_rate

    @property
    def peak_power(self) -> float:
        return self.avg_optical_power / self.ook_duty


@dataclass(frozen=True)
class ThresholdDecision:
    """An integer decision threshold and the error probability it yields."""

    n_t: int
    pe: float


def photon_energy(wavelength: float) -> float:
    """Single-photon energy h*c/wavelength in joules."""
    if not (np.isfinite(wavelength) and wavelength > 0):
        raise ValueError(f"wavelength must be finite and > 0, got {wavelength!r}")
    return PLANCK_CONSTANT * SPEED_OF_LIGHT / wavelength


def effective_pde(model: PdeModel) -> float:
    """Photon detection efficiency: quantum efficiency x avalanche
    initiation probability x fill factor."""
    return model.quantum_efficiency * model.avalanche_init_prob * model.fill_factor


def lambda_s(peak_power: float, bit_time: float, wavelength: float,
             pde: float) -> float:
    """Expected detected signal photons in one bit.

    peak_power * bit_time is the optical energy delivered during a 1-bit;
    dividing by the photon energy and scaling by the detection efficiency
    gives the detected count.
    """
    _require_nonnegative("peak_power", peak_power)
    _require_nonnegative("bit_time", bit_time)
    _require_fraction("pde", pde)
    return peak_power * bit_time / photon_energy(wavelength) * pde


def pe(budget: PhotonBudget, n_t: int) -> float:
    """Error probability of the threshold receiver at integer threshold n_t.

    Stable for means up to at least 1e4 (regularized incomplete-gamma
    evaluation of the Poisson CDF/SF, no explicit term-by-term sums).
    """
    if n_t < 0:
        raise ValueError(f"n_t must be >= 0, got {n_t!r}")
    miss = pdtr(n_t, budget.lambda_s + budget.lambda_b)
    false_alarm = pdtrc(n_t, budget.lambda_b)
    return 0.5 * float(miss) + 0.5 * float(false_alarm)


def _pe_grid(budget: PhotonBudget, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    return 0.5 * pdtr(n, budget.lambda_s + budget.lambda_b) + 0.5 * pdtrc(n, budget.lambda_b)


def optimal_threshold(budget: PhotonBudget, n_max: int = 100) -> ThresholdDecision:
    """Threshold in [0, n_max] minimizing pe; ties go to the smaller n_t."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max!r}")
    values = _pe_grid(budget, n_max)
    best = int(np.argmin(values))  # argmin returns the first minimum
    return ThresholdDecision(n_t=best, pe=float(values[best]))


def poisson_limit(budget: PhotonBudget) -> ThresholdDecision:
    """Best achievable pe for the budget, with the threshold search range
    widened automatically for large means."""
    mean = budget.lambda_s + budget.lambda_b
    n_max = max(100, int(mean + 12.0 * math.sqrt(mean + 1.0) + 20.0))
    return optimal_threshold(budget, n_max)


def _optimal_pe(ls: float, lb: float) -> ThresholdDecision:
    return poisson_limit(PhotonBudget(ls, lb))


def required_lambda_s(lambda_b: float, target_pe: float, tol: float = 1e-6) -> float:
    """Smallest detected signal count per bit achieving pe <= target_pe.

    Bisection on lambda_s; the decision threshold is re-optimized at every
    trial point.  With no background this reduces to -ln(2 * target_pe).
    """
    _require_nonnegative("lambda_b", lambda_b)
    if not (0.0 < target_pe < 0.5):
        raise ValueError(f"target_pe must be in (0, 0.5), got {target_pe!r}")

    lo, hi = 0.0, 1.0
    for _ in range(64):
        if _optimal_pe(hi, lambda_b).pe <= target_pe:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise ConvergenceError(
            f"no lambda_s <= {hi:g} reaches pe <= {target_pe:g} at lambda_b={lambda_b:g}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _optimal_pe(mid, lambda_b).pe <= target_pe:
            hi = mid
        else:
            lo = mid
    return hi


def required_avg_power(dark_rate: float, data_rate: float, target_pe: float,
                       pde: float, wavelength: float,
                       ook_duty: float = 0.5) -> float:
    """Average optical power (W) needed to hold target_pe.

    Background per bit is dark_rate/data_rate; the required signal count is
    converted to peak power through the per-bit energy balance and averaged
    over the OOK duty cycle.
    """
    if not (np.isfinite(data_rate) and data_rate > 0):
        raise ValueError(f"data_rate must be > 0, got {data_rate!r}")
    if not (np.isfinite(pde) and 0.0 < pde <= 1.0):
        raise ValueError(f"pde must be in (0, 1], got {pde!r}")
    _require_nonnegative("dark_rate", dark_rate)
    lam_b = dark_rate / data_rate
    lam_s = required_lambda_s(lam_b, target_pe)
    bit_time = 1.0 / data_rate
    peak = lam_s * photon_energy(wavelength) / (bit_time * pde)
    return peak * ook_duty


def power_penalty_curve(lambda_b_grid, target_pe: float):
    """Required lambda_s and optimal threshold over a background grid.

    Returns one (lambda_b, lambda_s_required, n_t) tuple per grid point;
    lambda_s_required is non-decreasing in lambda_b.
    """
    grid = np.asarray(lambda_b_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda_b_grid must be non-empty")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValueError("lambda_b_grid must be sorted and >= 0")
    rows = []
    for lam_b in grid:
        lam_s = required_lambda_s(float(lam_b), target_pe)
        decision = _optimal_pe(lam_s, float(lam_b))
        rows.append((float(lam_b), lam_s, decision.n_t))
    return rows


def watts_to_dbm(power_w: float) -> float:
    if power_w <= 0:
        raise ValueError(f"power must be > 0 to convert to dBm, got {power_w!r}")
    return 10.0 * math.log10(power_w / 1e-3)


def dbm_to_watts(power_dbm: float) -> float:
    return 10.0 ** (power_dbm / 10.0) * 1e-3
