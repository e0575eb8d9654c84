import numpy as np
import pytest

from minmaxcbo import (
    NumericalError,
    ReferencePoint,
    benchmark_reference,
    best_pair,
    error_to_reference,
    fit_decay_rate,
    make_benchmark,
    run_benchmark,
    spread,
    variance,
)
from minmaxcbo.diagnostics import RunRecord
from minmaxcbo.dynamics import Ensemble

COUPLED = make_benchmark("bilinearly_coupled")


def _ens(xs, ys):
    return Ensemble(xs=np.asarray(xs, float), ys=np.asarray(ys, float), step_index=0, seed=0)


def test_variance_zero_at_reference():
    ref = ReferencePoint(np.array([0.5]), np.array([[1.0], [-1.0]]))
    ens = _ens([[0.5]] * 4, [[1.0]] * 4)
    assert variance(ens, ref) == (0.0, 0.0)


def test_variance_simple_arithmetic():
    ref = ReferencePoint(np.array([0.0]), np.array([[0.0]]))
    ens = _ens([[-1.0], [1.0]], [[0.0], [0.0]])
    vx, vy = variance(ens, ref)
    assert vx == 1.0 and vy == 0.0


def test_variance_nearest_y_star():
    ref = ReferencePoint(np.array([0.0]), np.array([[2.0], [-2.0]]))
    ens = _ens([[0.0]], [[-1.9]])
    _, vy = variance(ens, ref)
    assert vy == pytest.approx(0.01, abs=1e-12)


def test_variance_y_free_reference_measures_x_only():
    ref = ReferencePoint(np.array([0.0]), np.array([[0.0]]), y_free=True)
    ens = _ens([[2.0]], [[123.0]])
    assert variance(ens, ref) == (4.0, 0.0)


def test_variance_translation_consistency():
    rng = np.random.default_rng(0)
    xs, ys = rng.normal(size=(6, 1)), rng.normal(size=(6, 1))
    ref = ReferencePoint(np.array([0.3]), np.array([[-0.7]]))
    shift = 1.25
    v1 = variance(_ens(xs, ys), ref)
    v2 = variance(
        _ens(xs + shift, ys + shift),
        ReferencePoint(ref.x_star + shift, ref.y_star_set + shift),
    )
    assert v1 == pytest.approx(v2, rel=1e-12)


def test_spread_is_max_pairwise_linf():
    ens = _ens([[0.0], [0.25], [-1.0]], [[2.0], [2.0], [2.0]])
    sx, sy = spread(ens)
    assert sx == 1.25 and sy == 0.0


def test_best_pair_single_particle():
    ens = _ens([[1.0]], [[2.0]])
    bx, by, value = best_pair(ens, make_benchmark("bilinear"))
    assert bx[0] == 1.0 and by[0] == 2.0 and value == 2.0


def test_best_pair_hand_table_with_tie_break():
    # E = x*y over xs {-1, 0, 1}, ys {-1, 1}: row maxima are {1, 0, 1},
    # so i* is x=0; its row ties at 0, lowest y-index wins: y=-1
    ens = _ens([[-1.0], [0.0], [1.0]], [[-1.0], [1.0]])
    bx, by, value = best_pair(ens, make_benchmark("bilinear"))
    assert bx[0] == 0.0 and by[0] == -1.0 and value == 0.0


def test_best_pair_with_planted_solution():
    rng = np.random.default_rng(42)
    xs = np.vstack([rng.uniform(-4, 4, (50, 1)), [[0.0]]])
    ys = np.vstack([rng.uniform(-4, 4, (50, 1)), [[2.24]]])
    planted_value = COUPLED.value(np.array([0.0]), np.array([2.24]))
    _, _, value = best_pair(_ens(xs, ys), COUPLED)
    assert abs(value - planted_value) < 0.5


def test_error_to_reference_exact_hit_and_nearest():
    ref = ReferencePoint(np.array([0.0]), np.array([[2.24], [-2.24]]))
    assert error_to_reference((np.array([0.0]), np.array([-2.24])), ref) == 0.0
    err = error_to_reference((np.array([0.1]), np.array([2.14])), ref)
    assert err == pytest.approx(0.02, rel=1e-12)


def test_error_to_reference_symmetric_in_y_star_order():
    pair = (np.array([0.3]), np.array([1.8]))
    a = ReferencePoint(np.array([0.0]), np.array([[2.24], [-2.24]]))
    b = ReferencePoint(np.array([0.0]), np.array([[-2.24], [2.24]]))
    assert error_to_reference(pair, a) == error_to_reference(pair, b)


def test_fit_decay_rate_exact_exponential():
    t = np.arange(0, 101) * 0.1
    record = RunRecord(times=list(t), variance_x=list(np.exp(-0.5 * t)), variance_y=[0.0] * 101)
    assert fit_decay_rate(record) == pytest.approx(-0.5, abs=1e-9)


def test_fit_decay_rate_constant_is_zero():
    t = np.arange(0, 50) * 0.1
    record = RunRecord(times=list(t), variance_x=[2.0] * 50, variance_y=[1.0] * 50)
    assert fit_decay_rate(record) == pytest.approx(0.0, abs=1e-12)


def test_fit_decay_rate_ignores_noise_floor():
    # exact decay for 5 time units, then a plateau far above 1e-12 but
    # below the relative floor of 1e-3 * V(0)
    t = np.arange(0, 101) * 0.1
    v = np.exp(-2.0 * t)
    v[t > 5.0] = v[t <= 5.0][-1]
    record = RunRecord(times=list(t), variance_x=list(v), variance_y=[0.0] * 101)
    slope = fit_decay_rate(record)
    assert slope == pytest.approx(-2.0, rel=1e-6)


def test_fit_decay_rate_undefined_cases():
    with pytest.raises(NumericalError):
        fit_decay_rate(RunRecord(times=[0.0] * 20, variance_x=[0.0] * 20, variance_y=[0.0] * 20))
    with pytest.raises(NumericalError):
        fit_decay_rate(RunRecord(times=[0.0, 0.1], variance_x=[1.0, 0.5], variance_y=[0.0, 0.0]))


def test_bilinear_run_variance_drops_tenfold():
    record, _ = run_benchmark("bilinear", {"n_particles": 25, "seed": 0})
    v = record.variance_total
    assert v[150] < v[0] / 10.0


def test_benchmark_reference_values():
    ref = benchmark_reference("bilinearly_coupled")
    assert ref.y_star_set[:, 0] == pytest.approx([np.sqrt(5), -np.sqrt(5)])
    assert benchmark_reference("bilinear").y_free
    assert benchmark_reference("bivariate").y_free
    assert not benchmark_reference("forsaken").y_free
    assert benchmark_reference("forsaken").y_star_set[0, 0] == pytest.approx(1.30656296, abs=1e-6)
