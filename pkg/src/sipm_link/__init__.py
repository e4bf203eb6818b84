"""Photon-counting SiPM optical link: Monte Carlo simulator and
closed-form analysis."""

from .analog import (AmplifierConfig, ComparatorConfig, DigitalPulseTrain,
                     NoiseConfig, apply_gain, comparator, dc_block,
                     first_order_lpf, gbp_chain, min_width_filter,
                     threshold_sweep)
from .events import (BitStream, EventTimes, derive_seed, homogeneous_poisson,
                     merge, ook_signal_events, substream)
from .experiments import (LinkConfig, SweepSpec, config_from_dict,
                          config_to_dict, count_pulses_cw, gbp_study_config,
                          load_config, offline_chain_config, photon_budget,
                          realtime_chain_config, run_ber_vs_power,
                          run_dark_counts, run_dynamic_range, run_gbp_study,
                          run_power_penalty, run_sweep, run_threshold_sweep,
                          simulate_bathtub, simulate_counts, simulate_link)
from .receiver import (BerReport, BitWindowCounts, LfsrConfig, bathtub,
                       ber_measure, decide, interleaved_count, lfsr_prbs)
from .sipm import (MeasurementError, PulseTemplate, SiPMParams, Waveform,
                   calibrated_sipm_params, measure_fwhm, microcell_filter,
                   synth_waveform)
from .theory import (ConvergenceError, LinkParams, PdeModel, PhotonBudget,
                     ThresholdDecision, dbm_to_watts, effective_pde, lambda_s,
                     optimal_threshold, pe, photon_energy, poisson_limit,
                     power_penalty_curve, required_avg_power,
                     required_lambda_s, watts_to_dbm)

__version__ = "0.1.0"
