import pytest

from atcopt import checks, cli

k_small_config = """\
[potential]
homogeneous = true

[geometry]
ladder = [2]
psi_a = 4
kappa = 3

[study]
reference_factor = 1
analysis_ladder = []
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path/"small.toml"
    path.write_text(k_small_config)
    return str(path)


def test_check_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(checks, "run_checks", lambda cfg, seed: [
        checks.CheckResult("first", 1e-9, 1e-6), checks.CheckResult("second", 1.0, 0.5),
    ])
    assert cli.main(["check"]) == 1
    out = capsys.readouterr().out
    assert "second" in out and "FAIL" in out
    assert "1 of 2 checks failed" in out


def test_check_success(monkeypatch, capsys):
    monkeypatch.setattr(checks, "run_checks", lambda cfg, seed: [checks.CheckResult("only", 0.0, 1e-12)])
    assert cli.main(["check", "--seed", "3"]) == 0
    assert "all 1 checks passed" in capsys.readouterr().out


def test_missing_config(tmp_path, capsys):
    assert cli.main(["study", "--config", str(tmp_path/"missing.toml")]) == 2
    assert capsys.readouterr().err.startswith("ERROR: cannot read config")


def test_invalid_config(tmp_path, capsys):
    path = tmp_path/"bad.toml"
    path.write_text("[geometry]\nladder = [4]\n")
    assert cli.main(["mesh", "--config", str(path), "--dump", str(tmp_path/"mesh.txt")]) == 2
    assert "ladder entry R_core = 4" in capsys.readouterr().err


def test_mesh_dump(small_config, tmp_path, capsys):
    dump = tmp_path/"mesh.txt"
    assert cli.main(["mesh", "--config", small_config, "--dump", str(dump)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Rcore2-psi4-kappa3 nodes 1080 triangles 2016 reduction 1.00")
    assert dump.read_text().startswith("# nodes 1080\n")


def test_mesh_bad_ladder_entry(small_config, tmp_path, capsys):
    assert cli.main(["mesh", "--config", small_config, "--dump", str(tmp_path/"m.txt"), "--R-core", "1"]) == 2
    assert "--R-core 1" in capsys.readouterr().err


def test_unknown_log_level(small_config, tmp_path, capsys):
    argv = ["--log-level", "LOUD", "mesh", "--config", small_config, "--dump", str(tmp_path/"m.txt")]
    assert cli.main(argv) == 2
    assert "unknown log level 'LOUD'" in capsys.readouterr().err


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])
    args = cli.build_parser().parse_args(["study", "--config", "x.toml", "--kind", "norms"])
    assert args.handler is cli.run_study
    assert args.kind == "norms"


def test_study_command(small_config, tmp_path):
    out = tmp_path/"out"
    assert cli.main(["study", "--config", small_config, "--out", str(out)]) == 0
    lines = (out/"study.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("2,16,")
    assert lines[1].endswith(",ok")
