import json
import os
import struct

import numpy as np
import pytest

from primhd import spectral as sp
from primhd.cli import main
from primhd.config import EpsSweepJob, SimConfig, TwinRunJob, parse_config, serialize_config
from primhd.diagnostics import RECORD_FIELDS, NormRecord
from primhd.errors import ConfigError, GridMismatchError, SnapshotError
from primhd.experiments import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_UNSTABLE, SENTINEL, run_experiment, simulate
from primhd.fields import SMHDState
from primhd.initial import random_smooth
from primhd.pem import StepperConfig
from primhd.storage import MAGIC, checkpoint, read_rows, read_timeseries, restore, write_timeseries

SMALL = "model = PEM\nT_final = 0.01\nN = 8\ndt = 1e-3\nrecord_every = 5\n"


class TestConfig:
    def test_minimal_defaults(self):
        cfg = parse_config("model = PEM\nT_final = 1.0")
        assert cfg == SimConfig(model="PEM", T_final=1.0)
        assert (cfg.L1, cfg.L2, cfg.Nx, cfg.Ny, cfg.Nz) == (1.0, 1.0, 32, 32, 32)
        assert cfg.scheme == "RK3" and cfg.dt == 1e-3 and cfg.C_user == 1.0

    def test_eps_rejected_for_pem(self):
        with pytest.raises(ConfigError, match="eps not applicable") as info:
            parse_config("model = PEM\nT_final = 1\neps = 0.1\n")
        assert info.value.line == 3

    def test_smhd_requires_eps(self):
        with pytest.raises(ConfigError):
            parse_config("model = SMHD\nT_final = 1")

    @pytest.mark.parametrize(
        "text, line",
        [
            ("model = PEM\nT_final = 1\ncolour = red\n", 3),
            ("model = PEM\nT_final = abc\n", 2),
            ("model = PEM\nmodel = PEM\nT_final = 1\n", 2),
            ("# comment\nmodel PEM\n", 2),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.line == line

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="T_final"):
            parse_config("model = PEM")

    def test_invariants(self):
        with pytest.raises(ConfigError):
            parse_config("model = PEM\nT_final = -1")
        with pytest.raises(ConfigError):
            parse_config("model = PEM\nT_final = 1\nrecord_every = 0")
        with pytest.raises(ConfigError):
            parse_config("model = PEM\nT_final = 1\ndelta = -1", "twin")

    def test_round_trip_complete_config(self):
        text = (
            "model = SMHD\nT_final = 0.5\neps = 0.1\nL1 = 2.0\nL2 = 0.5\nNx = 16\nNy = 8\nNz = 12\n"
            "dt = 0.0005\nscheme = RK2\ncfl_limit = 0.4\nclean_magnetic_barotropic = true\nrecord_every = 3\n"
            "initial_condition = taylor-green-mhd\nic_amplitude = 0.3\noutput_dir = out/x\nseed = 9\nC_user = 2.5\n"
        )
        cfg = parse_config(text)
        assert parse_config(serialize_config(cfg)) == cfg

    @pytest.mark.parametrize(
        "kind, extra, cls",
        [("twin", "delta = 0.002\nperturbation_seed = 4\n", TwinRunJob), ("sweep", "eps_values = 0.3, 0.1\n", EpsSweepJob)],
    )
    def test_round_trip_experiment_jobs(self, kind, extra, cls):
        job = parse_config(SMALL + extra, kind)
        assert isinstance(job, cls)
        assert parse_config(serialize_config(job), kind) == job


class TestTimeseries:
    def test_single_zero_record(self, tmp_path):
        path = tmp_path / "ts.csv"
        write_timeseries([NormRecord()], path)
        lines = path.read_text().split("\n")
        assert lines[0] == ",".join(RECORD_FIELDS)
        assert lines[1] == ",".join(["0"] * len(RECORD_FIELDS))
        assert lines[2] == ""

    def test_exact_round_trip(self, tmp_path, pem16):
        records = [NormRecord(*np.random.default_rng(0).standard_normal(len(RECORD_FIELDS)))]
        _, more, _ = simulate(pem16, StepperConfig(), 3)
        path = tmp_path / "ts.csv"
        write_timeseries(records + more, path)
        assert read_timeseries(path) == records + more

    def test_column_count_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(RECORD_FIELDS) + "\n1,2,3\n")
        with pytest.raises(ValueError):
            read_timeseries(path)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_timeseries([], tmp_path / "x.csv")


class TestCheckpoint:
    def test_bitwise_round_trip(self, tmp_path, pem16):
        path = tmp_path / "s.snap"
        checkpoint(pem16.with_time(0.25), path)
        back = restore(path)
        assert np.array_equal(back.stacked(), pem16.stacked()) and back.time == 0.25 and back.grid == pem16.grid

    def test_smhd_round_trip(self, tmp_path, pem16):
        s = SMHDState.well_prepared(pem16, 0.2)
        checkpoint(s, tmp_path / "s.snap")
        back = restore(tmp_path / "s.snap")
        assert back.model == "SMHD" and back.eps == 0.2 and np.array_equal(back.stacked(), s.stacked())

    def test_header_layout(self, tmp_path):
        g = sp.Grid(8, 6, 10, L1=2.0, L2=0.5)
        s = random_smooth(g, 0)
        checkpoint(s, tmp_path / "s.snap")
        raw = (tmp_path / "s.snap").read_bytes()
        assert raw[:8] == MAGIC
        assert struct.unpack_from("<ddIIIIdd", raw, 8) == (2.0, 0.5, 8, 6, 10, 0, 0.0, 0.0)
        assert len(raw) == 56 + 16 * 4 * 10 * 6 * 5

    def test_continuation_is_identical(self, tmp_path, pem16):
        cfg = StepperConfig()
        full, rec_full, _ = simulate(pem16, cfg, 20)
        half, rec_a, _ = simulate(pem16, cfg, 10)
        checkpoint(half, tmp_path / "mid.snap")
        resumed, rec_b, _ = simulate(restore(tmp_path / "mid.snap"), cfg, 10)
        write_timeseries(rec_full, tmp_path / "a.csv")
        write_timeseries(rec_a + rec_b[1:], tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert np.array_equal(resumed.stacked(), full.stacked())

    @pytest.mark.parametrize("damage", ["magic", "truncate", "nan"])
    def test_corruption_detected(self, tmp_path, pem16, damage):
        path = tmp_path / "s.snap"
        checkpoint(pem16, path)
        raw = bytearray(path.read_bytes())
        if damage == "magic":
            raw[:8] = b"NOTASNAP"
        elif damage == "truncate":
            raw = raw[:-16]
        else:
            raw[-8:] = struct.pack("<d", float("nan"))
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotError):
            restore(path)

    def test_grid_mismatch(self, tmp_path, pem16):
        checkpoint(pem16, tmp_path / "s.snap")
        with pytest.raises(GridMismatchError):
            restore(tmp_path / "s.snap", grid=sp.Grid.cube(8))


class TestExperiments:
    def test_single_run_artifacts(self, tmp_path):
        res = run_experiment(parse_config(SMALL), tmp_path / "run")
        assert res.status == EXIT_OK
        names = set(os.listdir(tmp_path / "run"))
        assert {"timeseries.csv", "final.snap", "bounds.json", "config.txt"} <= names
        assert len(read_timeseries(tmp_path / "run" / "timeseries.csv")) == 3
        bounds = json.loads((tmp_path / "run" / "bounds.json").read_text())
        assert set(bounds["empirical_C"]) == {"l4", "dz", "h1", "h2"}

    def test_reruns_are_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            assert run_experiment(parse_config(SMALL + "seed = 4\n"), tmp_path / name).status == EXIT_OK
        for f in ("timeseries.csv", "final.snap", "bounds.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_twin_with_zero_perturbation(self, tmp_path):
        res = run_experiment(parse_config(SMALL + "delta = 0\n", "twin"), tmp_path / "twin")
        assert res.status == EXIT_OK
        header, rows = read_rows(tmp_path / "twin" / "difference.csv")
        assert header == ["time", "diff_l2sq", "diff_l2"]
        assert max(float(r[1]) for r in rows) <= 1e-12

    def test_sweep_table(self, tmp_path):
        job = parse_config("T_final = 0.02\nN = 8\ndt = 1e-3\neps_values = 0.2, 0.1\n", "sweep")
        res = run_experiment(job, tmp_path / "sweep")
        assert res.status == EXIT_OK
        header, rows = read_rows(tmp_path / "sweep" / "convergence.csv")
        assert header == ["eps", "diff_l2", "local_order"] and len(rows) == 2
        assert float(rows[1][1]) < float(rows[0][1])

    def test_inequality_run(self, tmp_path):
        job = parse_config("N = 32\nsamples = 3\nN_check = 0\nlemmas = t24, l22a\n", "inequality")
        res = run_experiment(job, tmp_path / "ineq")
        assert res.status == EXIT_OK
        assert set(res.summary["32"]) == {"t24", "l22a"}

    def test_blow_up_leaves_sentinel(self, tmp_path):
        cfg = parse_config("model = PEM\nT_final = 1\nN = 8\ndt = 0.2\nic_amplitude = 50\n")
        res = run_experiment(cfg, tmp_path / "bad")
        assert res.status == EXIT_UNSTABLE
        assert (tmp_path / "bad" / SENTINEL).exists()

    def test_resume_from_snapshot(self, tmp_path):
        assert run_experiment(parse_config(SMALL), tmp_path / "first").status == EXIT_OK
        cfg = parse_config(SMALL.replace("T_final = 0.01", "T_final = 0.02"))
        res = run_experiment(cfg, tmp_path / "second", resume=tmp_path / "first" / "final.snap")
        assert res.status == EXIT_OK
        assert res.summary["final_time"] == pytest.approx(0.02)

    def test_missing_snapshot_is_io_error(self, tmp_path):
        res = run_experiment(parse_config(SMALL), tmp_path / "x", resume=tmp_path / "missing.snap")
        assert res.status == EXIT_IO

    def test_resume_grid_mismatch_is_config_error(self, tmp_path, pem16):
        checkpoint(pem16, tmp_path / "s.snap")
        res = run_experiment(parse_config(SMALL), tmp_path / "x", resume=tmp_path / "s.snap")
        assert res.status == EXIT_CONFIG


class TestCli:
    def test_run_pem(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("T_final = 0.005\nN = 8\n")
        assert main(["run-pem", "--config", str(cfg), "--output", str(tmp_path / "o"), "--seed", "2"]) == EXIT_OK
        assert "seed = 2" in (tmp_path / "o" / "config.txt").read_text()
        assert json.loads(capsys.readouterr().out)["records"] == 6

    def test_model_mismatch(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = PEM\nT_final = 0.005\nN = 8\n")
        assert main(["run-smhd", "--config", str(cfg), "--output", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("T_final = 1\nN = 8\nwibble = 3\n")
        assert main(["run-pem", "--config", str(cfg)]) == EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["twin-run", "--config", str(tmp_path / "nope.cfg")]) == EXIT_IO

    def test_verify_subset(self, capsys):
        assert main(["verify", "--only", "8"]) == EXIT_OK
        assert "[PASS] criterion 8" in capsys.readouterr().out
