import json

import pytest

from ccsched.cli import main, parse_snr_grid
from ccsched.errors import ParameterError
from ccsched.model import table_from_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_feasible_beta_output(capsys):
    code, out, _ = run_cli(capsys, "feasible-beta", "--L", "11", "--G", "8", "--t", "2", "--omega", "4")
    assert code == 0
    assert out.strip() == "3 6"


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["feasible-beta", "--L", "11", "--bogus", "1"])
    assert exc.value.code == 2


def test_schedule_writes_valid_table(tmp_path, capsys):
    out = tmp_path / "table.json"
    code, _, _ = run_cli(
        capsys,
        "schedule", "--mode", "asym", "--omega", "5", "--t", "1", "--L", "10",
        "--G", "3", "--beta", "2", "--m", "2", "--seed", "7", "-o", str(out),
    )
    assert code == 0
    table = table_from_json(out.read_text())
    table.validate()
    assert len(table.columns) == 10


def test_schedule_then_verify_roundtrip(tmp_path, capsys):
    out = tmp_path / "t.json"
    run_cli(capsys, "schedule", "--mode", "sym", "--omega", "4", "--t", "1",
            "--L", "11", "--G", "8", "--beta", "2", "-o", str(out))
    code, stdout, _ = run_cli(capsys, "verify", "--table", str(out), "--numeric", "--trials", "3")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["symbolic"] == "PASS"
    assert doc["numeric"]["ok"] is True


def test_verify_fails_on_bad_table(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "omega": 3, "t": 1, "L": 2, "G": 9, "users": [1, 2, 3],
        "delta": 1, "delta_tilde": 3,
        "m": 0, "columns": [[[1, 2], [1, 3], [2, 3]]] * 3,
    }))
    code, stdout, _ = run_cli(capsys, "verify", "--table", str(bad))
    assert code == 4
    # the JSON verdict is printed before the error is raised
    assert '"FAIL"' in stdout


def test_infeasible_m_is_parameter_error(capsys):
    code, _, err = run_cli(
        capsys,
        "schedule", "--mode", "asym", "--omega", "5", "--t", "2", "--L", "11",
        "--G", "6", "--beta", "3", "--m", "4", "-o", "-",
    )
    assert code == 2
    doc = json.loads(err)
    assert doc["error"]["type"] == "InfeasibleMError"
    assert "reason" in doc["error"]


def test_construction_failure_exits_3(capsys):
    # m exceeds the distinct donor groups of the beta=1 baseline at omega=4
    code, _, err = run_cli(
        capsys,
        "schedule", "--mode", "asym", "--omega", "4", "--t", "1", "--L", "11",
        "--G", "8", "--beta", "1", "--m", "3", "-o", "-",
    )
    assert code == 3
    assert json.loads(err)["error"]["type"] == "ConstructionError"


def test_rate_sweep_csv(tmp_path, capsys):
    table = tmp_path / "t.json"
    run_cli(capsys, "schedule", "--mode", "sym", "--omega", "5", "--t", "1",
            "--L", "10", "--G", "3", "--beta", "2", "-o", str(table))
    out = tmp_path / "sweep.csv"
    code, _, _ = run_cli(capsys, "rate-sweep", "--table", str(table), "--snr", "0:10:20",
                         "--trials", "5", "--seed", "3", "-o", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "snr_db,mean_rsym,std_rsym,min_column_rate,dof,theta"
    assert len(lines) == 4
    assert lines[1].split(",")[0] == "0"


def test_rate_sweep_deterministic(tmp_path, capsys):
    table = tmp_path / "t.json"
    run_cli(capsys, "schedule", "--mode", "sym", "--omega", "4", "--t", "1",
            "--L", "11", "--G", "8", "--beta", "1", "-o", str(table))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run_cli(capsys, "rate-sweep", "--table", str(table), "--snr", "0:10:20",
                "--trials", "4", "--seed", "11", "-o", str(out))
    assert a.read_bytes() == b.read_bytes()


def test_dof_region_csv_and_witnesses(tmp_path, capsys):
    out = tmp_path / "region.csv"
    code, _, _ = run_cli(capsys, "dof-region", "--L", "11", "--G", "8", "--t", "1",
                         "--omega", "4", "-o", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "scheme,omega,t,beta,m,dof,witness_file"
    dofs = [int(line.split(",")[5]) for line in lines[1:]]
    assert dofs == list(range(4, 21, 2))
    for line in lines[1:]:
        witness = tmp_path / line.split(",")[6]
        table = table_from_json(witness.read_text())
        table.validate()


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("L = 11\nG = 8\nt = 2\nomega = 4  # comment\n")
    code, out, _ = run_cli(capsys, "feasible-beta", "--config", str(cfg),
                           "--L", "11", "--G", "8", "--t", "2", "--omega", "4")
    assert code == 0 and out.strip() == "3 6"


def test_config_cli_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("trials = 4\nsnr = 0:10:10\nseed = 2\n")
    table = tmp_path / "t.json"
    run_cli(capsys, "schedule", "--mode", "sym", "--omega", "4", "--t", "1",
            "--L", "11", "--G", "8", "--beta", "1", "-o", str(table))
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "rate-sweep", "--config", str(cfg), "--table", str(table),
                         "--snr", "0:10:20", "-o", str(out))
    assert code == 0
    # CLI --snr wins over the config, config supplies trials/seed
    assert len(out.read_text().strip().split("\n")) == 4


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 3\n")
    code, _, err = run_cli(capsys, "feasible-beta", "--config", str(cfg),
                           "--L", "10", "--G", "3", "--t", "1", "--omega", "5")
    assert code == 2
    assert json.loads(err)["error"]["type"] == "ParameterError"


def test_parse_snr_grid():
    assert parse_snr_grid("0:5:15") == [0, 5, 10, 15]
    assert parse_snr_grid("3,7") == [3.0, 7.0]
    with pytest.raises(ParameterError):
        parse_snr_grid("0:-5:10")
    with pytest.raises(ParameterError):
        parse_snr_grid("0:5")


def test_reproduce_example2(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "reproduce", "--case", "example2", "-o", str(tmp_path / "art"))
    assert code == 0
    assert "PASS  example2: dof = 24" in out
    assert "FAIL" not in out
    table = table_from_json((tmp_path / "art" / "example2.json").read_text())
    assert table.delta_tilde == 8 and len(table.columns) == 10


def test_reproduce_determinism(tmp_path, capsys):
    for name in ("r1", "r2"):
        code, _, _ = run_cli(capsys, "reproduce", "--case", "example1", "--seed", "4",
                             "-o", str(tmp_path / name))
        assert code == 0
    a = (tmp_path / "r1" / "example1.json").read_bytes()
    b = (tmp_path / "r2" / "example1.json").read_bytes()
    assert a == b
