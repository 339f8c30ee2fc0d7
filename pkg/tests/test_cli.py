"""Tests for the `simulate` command-line interface."""

from pathlib import Path

import pytest

from mimolink.cli import main
from mimolink.simulate import CSV_COLUMNS

FAST_CFG = """
N_t = 2
N_r = 2
M_constellation = 16
n_pilot = 4
noise_power = [1e-4, 1e-2]
n_transmissions = 10
"""


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text(FAST_CFG + f"output = {tmp_path / 'output.csv'}\n")
    return path


class TestCli:
    def test_successful_run_writes_csv(self, fast_config, tmp_path, capsys):
        assert main(["--config", str(fast_config)]) == 0
        out_path = tmp_path / "output.csv"
        lines = out_path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3
        assert "output.csv" in capsys.readouterr().out

    def test_flag_overrides_reach_the_records(self, fast_config, tmp_path):
        assert main([
            "--config", str(fast_config),
            "--seed", "123",
            "--detector", "kmeans",
            "--estimator", "lmmse",
            "--output", str(tmp_path / "other.csv"),
        ]) == 0
        lines = (tmp_path / "other.csv").read_text().splitlines()
        assert lines[1].endswith("kmeans,lmmse,123")

    def test_defaults_only_run_needs_no_config(self, tmp_path, monkeypatch, capsys):
        # a tiny override file keeps the default Table-sized run out of unit tests
        monkeypatch.chdir(tmp_path)
        cfg = tmp_path / "quick.cfg"
        cfg.write_text(FAST_CFG + "noise_power = [1e-3]\nn_transmissions = 2\n")
        assert main(["--config", str(cfg)]) == 0
        assert Path(tmp_path / "output.csv").exists()

    def test_extract_file(self, fast_config, tmp_path):
        assert main([
            "--config", str(fast_config),
            "--extract", "snr_tx_db,bler",
            "--extract-output", str(tmp_path / "pair.csv"),
        ]) == 0
        lines = (tmp_path / "pair.csv").read_text().splitlines()
        assert lines[0] == "snr_tx_db,bler"
        assert len(lines) == 3

    def test_default_extract_path(self, fast_config, tmp_path):
        assert main(["--config", str(fast_config), "--extract", "ebn0_tx_db,ber"]) == 0
        assert (tmp_path / "output_extract.csv").exists()

    def test_bad_config_exits_nonzero_with_message(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("M_constellation = 15\n")
        assert main(["--config", str(cfg)]) != 0
        assert "Must be a power of two" in capsys.readouterr().err

    def test_missing_config_file_exits_nonzero(self, tmp_path, capsys):
        assert main(["--config", str(tmp_path / "absent.cfg")]) != 0
        assert "absent.cfg" in capsys.readouterr().err

    def test_unknown_extract_column_exits_before_the_sweep(self, fast_config, capsys):
        assert main(["--config", str(fast_config), "--extract", "bogus"]) != 0
        assert "bogus" in capsys.readouterr().err
