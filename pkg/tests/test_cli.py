import json

import pytest

from movingsource import cli
from movingsource.core import ConfigError, LABC, TooManyRejections


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults_from_preset():
    cfg = cli.parse_config("example = linear_q2\nN = 150\n")
    assert cfg.spec.N == 150 and cfg.spec.tau == 5e-4
    assert cfg.spec.monitor.weights == (0.3, 0.3, 0.0, 0.4)


def test_epsilon_rule():
    cfg = cli.parse_config("example = example1\nN = 40\nepsilon = 1e3/N^4\n")
    assert cfg.spec.monitor.epsilon_for(cfg.spec.N) == pytest.approx(3.90625e-4, rel=1e-15)


def test_theta_arity():
    with pytest.raises(ConfigError) as info:
        cli.parse_config("example = linear_q2\ntheta = 0.3,0.3\n")
    assert info.value.line == 2


def test_example1_scalar_theta():
    cfg = cli.parse_config("# Example 1\nexample = example1   # interface\ntheta = 0.25\n")
    assert cfg.spec.monitor.weights == (0.25, 0.75, 0.0)


def test_all_keys():
    text = """
    example = symmetric_q2
    N = 60
    L = 10
    T = 0.5
    tau = 1e-3
    theta = 0.25, 0.25, 0.1, 0.4
    p = 1.5
    epsilon = 1e-4
    mu = 2e-3
    s0 = 2.0
    boundary = labc
    points_per_subdomain = 20, 20, 20
    mode = pc
    snapshot_times = 0.1, 0.2
    out_dir = somewhere
    """
    cfg = cli.parse_config(text)
    s = cfg.spec
    assert s.N == 60 and s.final_time == 0.5 and s.tau == 1e-3
    assert s.monitor.weights == (0.25, 0.25, 0.1, 0.4) and s.monitor.power == 1.5
    assert s.monitor.epsilon == 1e-4 and s.time_policy.mu == 2e-3
    assert s.boundary == LABC(2.0) and s.points_per_subdomain == (20, 20, 20)
    assert s.snapshot_times == (0.1, 0.2) and cfg.out_dir == "somewhere"


@pytest.mark.parametrize("text,line", [
    ("example = nope\n", 1),
    ("example = example1\nN = forty\n", 2),
    ("example = example1\nfoo = 1\n", 2),
    ("example = example1\njust words\n", 2),
    ("example = example1\nN = 4\nN = 5\n", 3),
    ("example = linear_q2\nmode = exact\n", 2),
    ("example = example1\nboundary = labc\n", 2),
    ("example = linear_q2\ntheta = 0.5,0.5,0.5,0.5\n", 2),
    ("example = linear_q2\nN = 30\npoints_per_subdomain = 10,10\n", 3),
    ("N = 40\n", None),
])
def test_config_errors(text, line):
    with pytest.raises(ConfigError) as info:
        cli.parse_config(text)
    assert info.value.line == line


def test_run_writes_outputs(tmp_path, capsys):
    cfg = write(tmp_path, "e1.cfg", "example = example1\nN = 24\nL = 24\nsnapshot_times = 0.05\n")
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["mesh_trajectory.txt", "snapshot_000.txt", "snapshot_001.txt",
                     "snapshot_002.txt", "summary.json"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["termination"] == "final_time" and summary["step_count"] == 24
    import numpy as np
    snap = np.loadtxt(out / "snapshot_001.txt")
    assert snap.shape == (25, 3) and snap[-1, 2] == 1.0
    traj = np.loadtxt(out / "mesh_trajectory.txt")
    assert np.all(np.diff(traj[:, 1:], axis=1) > 0)
    assert "final_time" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    cfg = write(tmp_path, "c.cfg", "example = sin_q2\nN = 30\nT = 0.1\n")
    for d in ("a", "b"):
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / d)]) == 0
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_config_error_exit_code(tmp_path):
    cfg = write(tmp_path, "bad.cfg", "example = nope\n")
    assert cli.main(["run", str(cfg)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise TooManyRejections("20 consecutive rejected steps")

    monkeypatch.setattr(cli, "run", boom)
    cfg = write(tmp_path, "c.cfg", "example = example1\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_check_pass_and_fail(tmp_path):
    cfg = write(tmp_path, "c.cfg", "example = example1\nN = 24\nL = 24\n")
    good = write(tmp_path, "good", "termination = final_time\nstep_count = 24\n"
                                   "errors.u_inf = 0.02 +- 0.01\n")
    bad = write(tmp_path, "bad", "step_count = 25\n")
    missing = write(tmp_path, "missing", "blow_up.time = 2.0\n")
    out = str(tmp_path / "o")
    assert cli.main(["run", str(cfg), "--out", out, "--check", str(good)]) == 0
    assert cli.main(["run", str(cfg), "--out", out, "--check", str(bad)]) == 4
    assert cli.main(["run", str(cfg), "--out", out, "--check", str(missing)]) == 4


def test_converge_single_rung(tmp_path, capsys):
    cfg = write(tmp_path, "c.cfg", "example = example1\nladder = 40:40\n")
    check = write(tmp_path, "chk", "rows.0.E = 1.0931e-2 +- 1.1e-2\n")
    out = tmp_path / "conv"
    assert cli.main(["converge", str(cfg), "--out", str(out), "--check", str(check)]) == 0
    rows = json.loads((out / "convergence.json").read_text())["rows"]
    assert len(rows) == 1 and rows[0]["ratio_E"] is None
    table = (out / "convergence.txt").read_text().splitlines()
    assert len(table) == 2 and table[1].split()[3] == "-"


def test_converge_needs_example1(tmp_path):
    cfg = write(tmp_path, "c.cfg", "example = linear_q2\n")
    assert cli.main(["converge", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_converge_ratios(tmp_path):
    cfg = cli.parse_config("example = example1\nladder = 40:40, 80:160\n")
    rows = cli.convergence_table(cfg)
    assert rows[1]["ratio_E"] == pytest.approx(rows[1]["E"] / rows[0]["E"])
    assert 0.23 <= rows[1]["ratio_E"] <= 0.27


def test_strict_flag_reaches_spec():
    cfg = cli.parse_config("example = symmetric_q2_labc\n", strict_paper_labc=True)
    assert cfg.spec.boundary.strict_paper


def test_strict_labc_run(tmp_path):
    cfg = write(tmp_path, "c.cfg", "example = symmetric_q2_labc\nN = 30\nT = 0.05\n")
    assert cli.main(["run", str(cfg), "--strict-paper-labc", "--out", str(tmp_path / "o")]) == 0
