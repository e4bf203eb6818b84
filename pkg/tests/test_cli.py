"""Command-line interface tests: table emission, reruns byte-for-byte,
config plumbing and error reporting."""

import json

import pytest

from sipm_link import experiments as exp
from sipm_link.cli import main


def read(path):
    return path.read_bytes()


class TestTheoryCommand:
    def test_writes_tables(self, tmp_path):
        out = tmp_path / "results"
        code = main(["--out", str(out), "theory",
                     "--lambda-b-grid", "0,0.048,0.5",
                     "--dark-rates", "48e3", "--data-rates", "1e6"])
        assert code == 0
        penalty = (out / "power_penalty.csv").read_text().splitlines()
        assert penalty[0] == "lambda_b,lambda_s_required,n_t"
        assert penalty[1].startswith("0,6.214")
        required = (out / "required_power.csv").read_text().splitlines()
        assert required[0] == "dark_count_rate_hz,data_rate_bps,avg_power_w,avg_power_dbm"

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ["theory", "--lambda-b-grid", "0,0.1,1",
                "--dark-rates", "3e4", "--data-rates", "1e5,1e6"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["--out", str(a)] + args) == 0
        assert main(["--out", str(b)] + args) == 0
        for name in ("power_penalty.csv", "required_power.csv"):
            assert read(a / name) == read(b / name)

    def test_plot_flag_writes_png(self, tmp_path):
        out = tmp_path / "plots"
        code = main(["--out", str(out), "--plot", "theory",
                     "--lambda-b-grid", "0,0.5",
                     "--dark-rates", "3e4", "--data-rates", "1e6"])
        assert code == 0
        assert (out / "power_penalty.png").exists()


class TestSimulateCommand:
    def test_ideal_run_writes_report_and_bathtub(self, tmp_path, capsys):
        out = tmp_path / "sim"
        code = main(["--out", str(out), "--seed", "3", "simulate",
                     "--mode", "ideal", "--bits", "50000"])
        assert code == 0
        lines = (out / "bathtub.csv").read_text().splitlines()
        assert lines[0] == "n_t,bits,errors,ber"
        assert len(lines) == 17
        report = (out / "ber_report.csv").read_text().splitlines()
        assert report[0] == "n_bits,n_errors,ber,n_t"
        assert "BER" in capsys.readouterr().out

    def test_config_file_round_trip(self, tmp_path):
        cfg = exp.realtime_chain_config(mode=exp.MODE_IDEAL, n_bits=20_000)
        cfg_path = tmp_path / "link.json"
        cfg_path.write_text(json.dumps(exp.config_to_dict(cfg)))
        out = tmp_path / "sim"
        code = main(["--out", str(out), "--config", str(cfg_path),
                     "--seed", "8", "simulate"])
        assert code == 0

    def test_seed_changes_output(self, tmp_path):
        outs = []
        for seed in ("1", "2"):
            out = tmp_path / f"s{seed}"
            main(["--out", str(out), "--seed", seed, "simulate",
                  "--mode", "ideal", "--bits", "50000"])
            outs.append(read(out / "bathtub.csv"))
        assert outs[0] != outs[1]


class TestSweepCommand:
    def test_vth_sweep(self, tmp_path):
        out = tmp_path / "sweep"
        code = main(["--out", str(out), "--seed", "4", "sweep", "--kind", "vth",
                     "--vth-grid", "0.010,0.018,0.026",
                     "--duration", "0.005"])
        assert code == 0
        lines = (out / "threshold_sweep.csv").read_text().splitlines()
        assert lines[0] == "v_th_volts,counts_per_second"
        assert len(lines) == 4

    def test_dynamic_range_sweep(self, tmp_path):
        out = tmp_path / "dyn"
        code = main(["--out", str(out), "--seed", "5", "sweep",
                     "--kind", "dynamic-range",
                     "--power-grid", "0,1e-11", "--duration", "0.005"])
        assert code == 0
        lines = (out / "dynamic_range.csv").read_text().splitlines()
        assert lines[0] == "avg_power_w,counts_per_s,theory_counts_per_s"
        assert len(lines) == 3


class TestBerCommand:
    def test_small_ideal_grid(self, tmp_path):
        out = tmp_path / "ber"
        code = main(["--out", str(out), "--seed", "6", "ber",
                     "--bits", "50000", "--power-grid", "4e-11,8e-11",
                     "--data-rates", "1e6"])
        assert code == 0
        lines = (out / "ber_vs_power.csv").read_text().splitlines()
        assert lines[0] == "data_rate_bps,avg_power_w,ber,n_t,theory_pe"
        assert len(lines) == 3


class TestGbpCommand:
    def test_reduced_study(self, tmp_path):
        out = tmp_path / "gbp"
        code = main(["--out", str(out), "--seed", "7", "gbp",
                     "--pairs", "1:5e8;20:6e6", "--pulses", "200",
                     "--power-grid", "1e-11", "--data-rates", "1e6"])
        assert code == 0
        stats = (out / "gbp_pulse_stats.csv").read_text().splitlines()
        assert stats[0] == ("gbp_hz,gain,bandwidth_hz,peak_mean_v,"
                            "peak_std_v,frac_above_vth")
        assert len(stats) == 3
        assert (out / "gbp_counts.csv").exists()
        assert (out / "gbp_required_power.csv").exists()


class TestErrors:
    def test_bad_config_path(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "--config", "missing.json",
                     "simulate"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_sweep_grid(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "sweep", "--kind", "vth",
                     "--vth-grid", "0.02,0.01", "--duration", "0.001"])
        assert code == 2
