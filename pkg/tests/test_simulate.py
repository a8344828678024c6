import numpy as np
import pytest

from conftest import make_state
from movingsource import make_example, run
from movingsource.core import LABC
from movingsource.problems import Example1Oracle, one_sided_jump
from movingsource.simulate import _Decimator, blow_up_record, initial_state


def test_blow_up_record_reports_ties():
    x = np.linspace(-2, 2, 9)
    u = np.array([0, 1, 5, 1, 0, 1, 5, 1, 0], dtype=float)
    b = blow_up_record(make_state(x, u, [2, 6], time=1.5))
    assert b.time == 1.5 and b.peak == 5.0
    assert b.locations == [-1.0, 1.0]
    assert b.source_values == [5.0, 5.0]


def test_blow_up_record_single_peak_source():
    x = np.linspace(0, 4, 5)
    b = blow_up_record(make_state(x, [0, 1, 2, 9, 0], [1, 3]))
    assert b.locations == [3.0] and b.source_index == 1


def test_decimator_bounds_rows():
    d = _Decimator(50)
    for k in range(1000):
        d.offer(k, np.array([k]))
    rows = d.finish(1000, np.array([1000]))
    assert len(rows) <= 50
    assert rows[0][0] == 0 and rows[-1][0] == 1000
    assert np.all(np.diff(rows[:, 0]) > 0)


def test_labc_initial_ghosts_from_initial_condition():
    spec = make_example("symmetric_q2_labc", N=30)
    state, src = initial_state(spec)
    assert isinstance(spec.boundary, LABC) and state.ghosts is not None
    x = state.mesh.nodes
    assert state.ghosts == (0.0, 0.0) and x[0] == -6.0 and x[-1] == 6.0
    np.testing.assert_array_equal(src.velocities, [np.pi, -np.pi])


def test_example1_short_run_report():
    spec = make_example("example1", N=24, L=24, snapshot_times=(0.05,))
    r = run(spec)
    assert r.termination == "final_time" and r.step_count == 24
    assert r.final.time == pytest.approx(0.1, abs=1e-15)
    assert [s.time for s in r.snapshots] == pytest.approx([0.0, 0.05, 0.1])
    assert r.errors["u_inf"] < 0.05 and r.errors["alpha"] < 0.05
    assert r.blow_up is None
    assert r.mesh_trajectory.shape == (25, 26)
    assert np.all(np.diff(r.mesh_trajectory[:, 1:], axis=1) > 0)
    assert r.max_value >= r.max_history[:, 1].max()


def test_trajectory_rows_capped():
    r = run(make_example("linear_q1", N=20, L=400), max_rows=30)
    assert len(r.mesh_trajectory) <= 30 and len(r.source_trajectories) <= 30
    assert r.mesh_trajectory[-1, 0] == pytest.approx(1.0)
    # constant velocity: alpha = 2 t at every recorded row
    np.testing.assert_allclose(r.source_trajectories[:, 1], 2 * r.source_trajectories[:, 0],
                               atol=1e-13)


@pytest.mark.parametrize("kw", [dict(N=60), dict(N=40, points_per_subdomain=(13, 14, 13)),
                                dict(N=60, boundary="labc")])
def test_mirror_symmetry(kw):
    r = run(make_example("symmetric_q2", T=0.6, **kw))
    x, u = r.final.mesh.nodes, r.final.values
    assert np.abs(x + x[::-1]).max() <= 1e-12 * np.abs(x).max()
    assert np.abs(u - u[::-1]).max() <= 1e-6 * u.max()
    np.testing.assert_allclose(r.sources.positions[0], -r.sources.positions[1], rtol=1e-12)


def test_discrete_jump_recovery_rate():
    oracle = Example1Oracle()
    errs = []
    for N, L in ((40, 40), (80, 160), (160, 640)):
        r = run(make_example("example1", N=N, L=L))
        F = oracle.strength(r.final.time, r.sources.positions[0])
        errs.append(abs(one_sided_jump(r.final) - F))
    for a, b in zip(errs, errs[1:]):
        assert b / a <= 0.55


def test_deterministic():
    a = run(make_example("sin_q2", N=30, T=0.2))
    b = run(make_example("sin_q2", N=30, T=0.2))
    assert np.array_equal(a.mesh_trajectory, b.mesh_trajectory)
    assert np.array_equal(a.final.values, b.final.values)


def test_newton_stats_recorded():
    r = run(make_example("linear_q2", N=30, T=0.05))
    st = r.newton_stats()
    assert st["max"] <= 5 and st["total"] == sum(r.newton_iterations)
    assert len(r.newton_iterations) == r.step_count
