import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lattc import (
    DomainError,
    ModularPoint,
    PeriodicSequence,
    gradient_check,
    lattice_from_modular,
    log_sequence,
    make_objective,
    maximize_2d,
    named_lattice,
    optimize_sequence_1d,
    scan_2d,
)
from lattc.errors import MaxIterations
from lattc.optimize import TRIANGULAR_POINT, fold, multistart_2d, random_starts

TRI_PT = ModularPoint(*TRIANGULAR_POINT)


def near_triangular(p, tol):
    return math.hypot(p.x - TRIANGULAR_POINT[0], p.y - TRIANGULAR_POINT[1]) < tol


# ------------------------------------------------------------ parametrisation


def test_modular_examples():
    assert np.allclose(lattice_from_modular(ModularPoint(0, 1)).basis, np.eye(2))
    T = lattice_from_modular(TRI_PT)
    assert np.allclose(T.basis, named_lattice("triangular").basis, atol=1e-15, rtol=0)
    assert abs(lattice_from_modular(ModularPoint(0.3, 0.7), 2).covolume - 2) < 1e-12


def test_modular_point_domain():
    with pytest.raises(DomainError):
        ModularPoint(0.1, 0.0)
    with pytest.raises(DomainError):
        lattice_from_modular(ModularPoint(0.1, 1.0), V=-1)
    assert TRI_PT.in_fundamental_domain()
    assert not ModularPoint(0.2, 0.5).in_fundamental_domain()


@given(st.floats(-5, 5), st.floats(0.05, 5))
def test_fold_lands_in_domain(x, y):
    fx, fy = fold(x, y)
    assert ModularPoint(fx, fy).in_fundamental_domain(1e-9) and fx >= 0


def test_objectives_modular_invariant():
    rng = np.random.default_rng(23)
    objs = [make_objective("theta"), make_objective("llog", x=0.4), make_objective("pair_llog", tol=1e-11)]
    for _ in range(20):
        x, y = rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.8)
        r2 = x * x + y * y
        for f in objs:
            v = f(x, y)
            assert abs(f(x + 1, y) - v) < 1e-9
            assert abs(f(-x / r2, y / r2) - v) < 1e-9
            assert abs(f(-x, y) - v) < 1e-9


def test_make_objective_rejects():
    with pytest.raises(DomainError):
        make_objective("energy")


# --------------------------------------------------------------------- scans


def test_scan_small_grid_and_csv():
    res = scan_2d(make_objective("theta"), grid_n=8)
    assert res.best_index == (7, 0)
    assert res.best_point == pytest.approx(TRIANGULAR_POINT, abs=1e-15)
    lines = res.to_csv().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == 65
    x_lo, x_hi, y_lo, y_hi = res.cell_bounds(*res.best_index)
    assert x_lo <= 0.5 <= x_hi and y_lo <= TRIANGULAR_POINT[1] <= y_hi
    assert res.cell_of(*TRIANGULAR_POINT) == (7, 0)


def test_scan_threads_do_not_change_values():
    obj = make_objective("llog", x=0.5)
    a = scan_2d(obj, grid_n=5)
    b = scan_2d(obj, grid_n=5, workers=3)
    assert np.array_equal(a.values, b.values)


def test_scan_rejects_tiny_grid():
    with pytest.raises(DomainError):
        scan_2d(make_objective("theta"), grid_n=1)


# ---------------------------------------------------------------- maximise


def test_neg_theta_from_off_start():
    rep = maximize_2d(make_objective("neg_theta"), ModularPoint(0.1, 1.3), tol=1e-6)
    assert rep.converged and rep.final_step < 1e-6
    assert near_triangular(rep.argpoint, 1e-4)


def test_llog_from_near_start():
    rep = maximize_2d(make_objective("llog", x=0.3), ModularPoint(0.45, 0.9))
    assert near_triangular(rep.argpoint, 1e-4)


def test_llog_started_at_optimum_is_cheap():
    rep = maximize_2d(make_objective("llog", x=0.5), TRI_PT)
    assert rep.converged and rep.iterations == 0
    assert rep.evaluations - 1 <= 2 * 2 + 2


def test_theta_minimised_directly():
    rep = maximize_2d(make_objective("theta"), ModularPoint(-0.3, 1.4))
    assert near_triangular(rep.argpoint, 1e-4)
    assert rep.value == pytest.approx(make_objective("theta")(*TRIANGULAR_POINT), abs=1e-10)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_scale_invariance(c):
    base = maximize_2d(make_objective("llog", x=0.5), ModularPoint(0.2, 1.2))
    rep = maximize_2d(make_objective("llog", x=0.5).scaled(c), ModularPoint(0.2, 1.2))
    assert abs(rep.argpoint.x - base.argpoint.x) < 1e-6 and abs(rep.argpoint.y - base.argpoint.y) < 1e-6


@pytest.mark.parametrize("kind", ["theta", "llog"])
def test_scan_and_optimizer_agree(kind):
    obj = make_objective(kind)
    res = scan_2d(obj, grid_n=10)
    rep = maximize_2d(obj, ModularPoint(0.1, 1.5))
    x_lo, x_hi, y_lo, y_hi = res.cell_bounds(*res.best_index)
    assert x_lo - 1e-6 <= rep.argpoint.x <= x_hi + 1e-6 and y_lo - 1e-6 <= rep.argpoint.y <= y_hi + 1e-6


def test_max_iterations():
    with pytest.raises(MaxIterations):
        maximize_2d(make_objective("theta"), ModularPoint(0.0, 1.8), max_iter=2)


def test_random_starts_seeded(monkeypatch):
    a = random_starts(5, seed=1)
    assert a == random_starts(5, seed=1)
    assert all(p.in_fundamental_domain() for p in a)
    monkeypatch.setenv("LATTC_SEED", "1")
    assert random_starts(5) == a


def test_multistart_reports():
    reps = multistart_2d(make_objective("theta"), restarts=3, seed=5)
    assert len(reps) == 3 and all(near_triangular(r.argpoint, 1e-4) for r in reps)
    d = json.loads(reps[0].to_json())
    assert set(d["argpoint"]) == {"x", "y"} and d["converged"] is True


# ------------------------------------------------------------------ 1D


def test_one_point_sequence():
    rep = optimize_sequence_1d(1, 0.3)
    assert rep.argpoint.points == (0.0,)
    assert abs(rep.value - 0.5 * math.log(0.3)) < 1e-12


def test_three_points():
    rep = optimize_sequence_1d(3, 0.5, restarts=10)
    assert np.allclose(rep.argpoint.points, [0, 1, 2], atol=1e-6)


def test_two_points_against_brute_scan():
    rep = optimize_sequence_1d(2, 0.25, restarts=5)
    assert abs(rep.argpoint.points[1] - 1) < 1e-6
    grid = np.arange(1e-3, 2, 1e-3)
    vals = [log_sequence(PeriodicSequence((0.0, float(t))), 0.25).value for t in grid]
    assert abs(grid[int(np.argmax(vals))] - 1) < 1e-3 + 1e-12


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("x", [0.25, 0.5])
def test_optimum_never_beats_equidistant(N, x):
    rep = optimize_sequence_1d(N, x, restarts=3)
    assert rep.value <= log_sequence(PeriodicSequence.equidistant(N), x, 1e-15).value + 1e-9


def test_one_d_deterministic_and_serialisable():
    a = optimize_sequence_1d(3, 0.4, restarts=2, seed=9)
    b = optimize_sequence_1d(3, 0.4, restarts=2, seed=9)
    assert a.to_json() == b.to_json()
    assert json.loads(a.to_json())["argpoint"]["points"][0] == 0.0
    with pytest.raises(DomainError):
        optimize_sequence_1d(0, 0.4)


# ----------------------------------------------------------- derivatives


def test_richardson_ratio():
    g = gradient_check(make_objective("theta"), ModularPoint(0.3, 1.1), 1e-4)
    assert all(3.5 <= r <= 4.5 for r in g.richardson_ratio)


def test_stationary_at_triangular():
    g = gradient_check(make_objective("llog", x=0.5), ModularPoint(0.5, 0.8660254), 1e-4)
    assert g.magnitude < 1e-5


def test_square_point_even_in_x():
    g = gradient_check(make_objective("theta"), ModularPoint(0.0, 1.0), 1e-4)
    assert abs(g.gradient[0]) < 1e-6
    assert set(g.to_dict()) == {"point", "h", "gradient", "magnitude", "richardson_ratio"}


def test_gradient_step_range():
    with pytest.raises(DomainError):
        gradient_check(make_objective("theta"), TRI_PT, h=1e-2)
