import json
import os
import subprocess
import sys

import pytest

from mswavelab.cli import main
from mswavelab.systems import preset_linear, system_to_config
from mswavelab.lifespan import SweepConfig, sweep_config_to_dict
from mswavelab.solver import SolverConfig


@pytest.fixture()
def linear_spec_file(tmp_path):
    path = tmp_path / "linear.json"
    path.write_text(json.dumps(system_to_config(preset_linear(2, 1, (1.0,)))))
    return str(path)


def test_missing_spec_file_is_config_error(tmp_path, capsys):
    code = main(["simulate", "--spec", str(tmp_path / "nope.json"),
                 "--epsilon", "0.1", "--tmax", "1.0", "--out", str(tmp_path / "out")])
    assert code == 1
    assert "nope.json" in capsys.readouterr().err


def test_unknown_subcommand_fails():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_simulate_linear_writes_artifacts(tmp_path, linear_spec_file):
    out = tmp_path / "run"
    code = main(["simulate", "--spec", linear_spec_file, "--epsilon", "0.05",
                 "--tmax", "1.0", "--out", str(out), "--resolution", "65",
                 "--support", "1.0", "--pad-cells", "6", "--sample-interval", "0.25"])
    assert code == 0
    assert (out / "trace.csv").exists()
    echo = json.loads((out / "config_echo.json").read_text())
    assert echo["command"] == "simulate"
    assert echo["exit_kind"] == "horizon"
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "t,E4,Etilde4,N4,M4,equivalence_ratio,gronwall_ratio"
    assert any(name.startswith("snapshot_u_") for name in os.listdir(out))


def test_simulate_deterministic_byte_identical(tmp_path, linear_spec_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["simulate", "--spec", linear_spec_file, "--epsilon", "0.05",
                     "--tmax", "0.5", "--out", str(out), "--resolution", "65",
                     "--support", "1.0", "--pad-cells", "6", "--sample-interval", "0.25",
                     "--family", "random_bump", "--seed", "3"])
        assert code == 0
        outs.append(out)
    for fname in ("trace.csv", "config_echo.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_simulate_deterministic_across_thread_counts(tmp_path, linear_spec_file):
    # tree (pairwise) reductions make the CSVs independent of BLAS/OMP threads
    outs = []
    for name, threads in (("t1", "1"), ("t4", "4")):
        out = tmp_path / name
        env = dict(os.environ, OMP_NUM_THREADS=threads, OPENBLAS_NUM_THREADS=threads)
        result = subprocess.run(
            [sys.executable, "-m", "mswavelab.cli", "simulate", "--spec", linear_spec_file,
             "--epsilon", "0.05", "--tmax", "0.5", "--out", str(out), "--resolution", "65",
             "--support", "1.0", "--pad-cells", "6", "--sample-interval", "0.25"],
            env=env, capture_output=True, text=True)
        assert result.returncode == 0, result.stderr
        outs.append(out)
    assert (outs[0] / "trace.csv").read_bytes() == (outs[1] / "trace.csv").read_bytes()


def test_verify_inequalities_small_run(tmp_path):
    out = tmp_path / "ver"
    code = main(["verify-inequalities", "--dim", "2", "--corpus-size", "6",
                 "--state-corpus-size", "2", "--resolution", "65",
                 "--seed", "7", "--out", str(out)])
    assert code == 0
    rows = (out / "inequalities.csv").read_text().strip().splitlines()
    assert rows[0] == "kind,corpus,worst_ratio,known_constant,pass"
    assert len(rows) > 5
    assert all(row.endswith(",true") for row in rows[1:])


def test_check_commutators_cli(tmp_path):
    out = tmp_path / "comm"
    code = main(["check-commutators", "--dim", "2", "--out", str(out)])
    assert code == 0
    rows = (out / "commutators.csv").read_text().strip().splitlines()
    assert rows[0] == "identity,residual,pass"
    assert all(row.endswith(",true") for row in rows[1:])


def test_lifespan_sweep_cli_censored_linear(tmp_path):
    cfg = SweepConfig(
        system=preset_linear(2, 1, (1.0,)),
        epsilons=(0.1, 0.05, 0.025),
        support=1.0,
        resolution=65,
        pad_cells=6,
        solver=SolverConfig(t_max=0.5, sample_interval=0.25, monitor="n4"),
    )
    sweep_file = tmp_path / "sweep.json"
    sweep_file.write_text(json.dumps(sweep_config_to_dict(cfg)))
    out = tmp_path / "sweep_out"
    code = main(["lifespan-sweep", "--sweep", str(sweep_file), "--out", str(out)])
    assert code == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["status"] == "inconclusive (censored)"
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert rows[0] == "epsilon,T_star,exit_kind"
    assert all(row.endswith("horizon") for row in rows[1:])


def test_cli_version():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
