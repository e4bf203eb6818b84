"""Command-line entry point.

Subcommands mirror the experiment campaigns: `theory` (power-penalty
tables), `simulate` (one BER run plus its bathtub), `sweep` (dynamic
range / threshold / bathtub), `ber` (BER versus power and data rate) and
`gbp` (the gain-bandwidth study).  Each writes CSV tables into --out;
--plot additionally renders a PNG per table.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as exp
from . import theory
from .theory import dbm_to_watts


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _load_cfg(args, default_factory) -> exp.LinkConfig:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "mode", None):
        overrides["mode"] = {"ideal": exp.MODE_IDEAL,
                             "waveform": exp.MODE_WAVEFORM}[args.mode]
    if getattr(args, "bits", None):
        overrides["n_bits"] = args.bits
    if args.config:
        return exp.load_config(args.config, **overrides)
    return default_factory(**overrides)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _maybe_plot(args, csv_path: Path, header, rows, x_col=0, y_cols=(1,),
                logx=False, logy=False) -> None:
    if not args.plot or not rows:
        return
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [row[x_col] for row in rows]
    for y in y_cols:
        ax.plot(xs, [row[y] for row in rows], marker=".", label=header[y])
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(header[x_col])
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(csv_path.with_suffix(".png"), dpi=120)
    plt.close(fig)


def _cmd_theory(args) -> int:
    out = _out_dir(args)
    lambda_b_grid = (_parse_floats(args.lambda_b_grid) if args.lambda_b_grid
                     else [0.0] + list(np.round(np.logspace(-3, 1, 25), 6)))
    dark_rates = _parse_floats(args.dark_rates)
    data_rates = _parse_floats(args.data_rates)
    outer, inset = exp.run_power_penalty(lambda_b_grid, dark_rates, data_rates,
                                         target_pe=args.target_pe,
                                         pde=args.pde,
                                         wavelength=args.wavelength)
    path = out / "power_penalty.csv"
    header = ["lambda_b", "lambda_s_required", "n_t"]
    exp.write_csv(path, header, outer)
    _maybe_plot(args, path, header, outer, x_col=0, y_cols=(1,), logx=False)
    path = out / "required_power.csv"
    header = ["dark_count_rate_hz", "data_rate_bps", "avg_power_w", "avg_power_dbm"]
    exp.write_csv(path, header, inset)
    _maybe_plot(args, path, header, inset, x_col=1, y_cols=(3,), logx=True)
    print(f"wrote {out / 'power_penalty.csv'} and {out / 'required_power.csv'}")
    return 0


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    cfg = _load_cfg(args, exp.realtime_chain_config)
    rows, best = exp.simulate_bathtub(cfg)
    header = ["n_t", "bits", "errors", "ber"]
    table = [(r.n_t, r.n_bits, r.n_errors, r.ber) for r in rows]
    exp.write_csv(out / "bathtub.csv", header, table)
    _maybe_plot(args, out / "bathtub.csv", header, table, y_cols=(3,), logy=True)
    report = best if cfg.n_t is None else next(r for r in rows if r.n_t == cfg.n_t)
    exp.write_csv(out / "ber_report.csv",
                  ["n_bits", "n_errors", "ber", "n_t"],
                  [(report.n_bits, report.n_errors, report.ber, report.n_t)])
    print(f"BER {report.ber:.3e} at n_t={report.n_t} "
          f"({report.n_errors}/{report.n_bits} errors)")
    return 0


def _cmd_sweep(args) -> int:
    out = _out_dir(args)
    if args.kind == "dynamic-range":
        cfg = _load_cfg(args, exp.offline_chain_config)
        grid = (_parse_floats(args.power_grid) if args.power_grid
                else [dbm_to_watts(d) for d in np.arange(-85, -39, 3.0)])
        rows = exp.run_dynamic_range(cfg, grid, duration=args.duration)
        header = ["avg_power_w", "counts_per_s", "theory_counts_per_s"]
        exp.write_csv(out / "dynamic_range.csv", header, rows)
        _maybe_plot(args, out / "dynamic_range.csv", header, rows,
                    y_cols=(1, 2), logx=True, logy=True)
    elif args.kind == "vth":
        cfg = _load_cfg(args, exp.offline_chain_config)
        grid = (_parse_floats(args.vth_grid) if args.vth_grid
                else list(np.arange(6e-3, 30e-3, 1e-3)))
        power = dbm_to_watts(args.power_dbm) if args.power_dbm is not None else 0.0
        rows = exp.run_threshold_sweep(cfg, grid, duration=args.duration,
                                       avg_power=power)
        header = ["v_th_volts", "counts_per_second"]
        exp.write_csv(out / "threshold_sweep.csv", header, rows)
        _maybe_plot(args, out / "threshold_sweep.csv", header, rows, y_cols=(1,))
    else:  # bathtub
        return _cmd_simulate(args)
    print(f"wrote sweep tables to {out}")
    return 0


def _cmd_ber(args) -> int:
    out = _out_dir(args)
    cfg = _load_cfg(args, exp.realtime_chain_config)
    powers = (_parse_floats(args.power_grid) if args.power_grid
              else [dbm_to_watts(d) for d in np.arange(-82, -67, 1.0)])
    rates = _parse_floats(args.data_rates)
    rows = exp.run_ber_vs_power(cfg, powers, rates)
    header = ["data_rate_bps", "avg_power_w", "ber", "n_t", "theory_pe"]
    exp.write_csv(out / "ber_vs_power.csv", header, rows)
    _maybe_plot(args, out / "ber_vs_power.csv", header, rows,
                x_col=1, y_cols=(2, 4), logx=True, logy=True)
    print(f"wrote {out / 'ber_vs_power.csv'} ({len(rows)} points)")
    return 0


def _cmd_gbp(args) -> int:
    out = _out_dir(args)
    cfg = _load_cfg(args, exp.gbp_study_config)
    pairs = exp.DEFAULT_GAIN_BW_PAIRS
    if args.pairs:
        pairs = []
        for tok in args.pairs.split(";"):
            gain, bw = tok.split(":")
            pairs.append((float(gain), float(bw)))
    powers = _parse_floats(args.power_grid) if args.power_grid else None
    rates = _parse_floats(args.data_rates) if args.data_rates else None
    result = exp.run_gbp_study(cfg, pairs, power_grid=powers, data_rates=rates,
                               n_pulses=args.pulses)
    header = ["gbp_hz", "gain", "bandwidth_hz", "peak_mean_v", "peak_std_v",
              "frac_above_vth"]
    exp.write_csv(out / "gbp_pulse_stats.csv", header, result.pulse_stats)
    header = ["gbp_hz", "gain", "bandwidth_hz", "avg_power_w", "counts_per_s",
              "theory_counts_per_s"]
    exp.write_csv(out / "gbp_counts.csv", header, result.counts)
    _maybe_plot(args, out / "gbp_counts.csv", header, result.counts,
                x_col=3, y_cols=(4, 5), logx=True, logy=True)
    header = ["gbp_hz", "gain", "bandwidth_hz", "data_rate_bps",
              "theory_avg_power_w", "required_avg_power_w"]
    exp.write_csv(out / "gbp_required_power.csv", header, result.required_power)
    print(f"wrote gbp tables to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sipm-link",
        description="Photon-counting SiPM OOK link simulator")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--config", default=None,
                        help="JSON LinkConfig file (see README for the schema)")
    parser.add_argument("--plot", action="store_true",
                        help="write a PNG next to each CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="closed-form power penalty tables")
    p.add_argument("--lambda-b-grid", default=None)
    p.add_argument("--dark-rates", default="1e3,1e4,3e4,4.8e4,1e5")
    p.add_argument("--data-rates", default="1e4,3e4,1e5,3e5,1e6")
    p.add_argument("--target-pe", type=float, default=1e-3)
    p.add_argument("--pde", type=float, default=0.036)
    p.add_argument("--wavelength", type=float, default=620e-9)
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("simulate", help="one BER measurement with bathtub")
    p.add_argument("--mode", choices=["ideal", "waveform"], default=None)
    p.add_argument("--bits", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="dynamic range / threshold / bathtub sweeps")
    p.add_argument("--kind", choices=["dynamic-range", "vth", "bathtub"],
                   required=True)
    p.add_argument("--mode", choices=["ideal", "waveform"], default=None)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--power-grid", default=None, help="comma-separated watts")
    p.add_argument("--vth-grid", default=None, help="comma-separated volts")
    p.add_argument("--power-dbm", type=float, default=None)
    p.add_argument("--duration", type=float, default=0.02)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("ber", help="BER versus optical power and data rate")
    p.add_argument("--mode", choices=["ideal", "waveform"], default="ideal")
    p.add_argument("--bits", type=int, default=200_000)
    p.add_argument("--power-grid", default=None, help="comma-separated watts")
    p.add_argument("--data-rates", default="1e4,1e5,1e6")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("gbp", help="gain-bandwidth-product study tables")
    p.add_argument("--pairs", default=None,
                   help="semicolon list of gain:bandwidth_hz")
    p.add_argument("--power-grid", default=None)
    p.add_argument("--data-rates", default=None)
    p.add_argument("--pulses", type=int, default=1000)
    p.set_defaults(func=_cmd_gbp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
