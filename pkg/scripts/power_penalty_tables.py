#!/usr/bin/env python3
"""Closed-form power-penalty tables.

Writes the required detected photons per bit versus background counts,
and the required average optical power versus data rate for a set of
dark count rates, all at a 1e-3 error-probability target.
"""

import argparse
from pathlib import Path

import numpy as np

from sipm_link import experiments as exp


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/theory")
    parser.add_argument("--target-pe", type=float, default=1e-3)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    lambda_b_grid = [0.0] + list(np.round(np.logspace(-3, 1, 41), 6))
    dark_rates = [1e3, 1e4, 3e4, 4.8e4, 1e5]
    data_rates = list(np.logspace(4, 6, 21))

    outer, inset = exp.run_power_penalty(lambda_b_grid, dark_rates, data_rates,
                                         target_pe=args.target_pe)
    exp.write_csv(out / "power_penalty.csv",
                  ["lambda_b", "lambda_s_required", "n_t"], outer)
    exp.write_csv(out / "required_power.csv",
                  ["dark_count_rate_hz", "data_rate_bps", "avg_power_w",
                   "avg_power_dbm"], inset)
    print(f"wrote {len(outer)} + {len(inset)} rows to {out}")


if __name__ == "__main__":
    main()
