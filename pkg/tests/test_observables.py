"""Sector-aggregated population observables."""
import warnings

import numpy as np
import pytest

from mazerlab import (
    Grid,
    GridMismatchError,
    InvalidParameterError,
    Trajectory,
    WavePacketSpec,
    aggregate_inversion,
    coupling_off,
    init_wavepacket,
    propagate,
    series_from_trajectory,
)


def tiny_run(params, n_steps=100, k0=1.0):
    g = Grid.around_cavity(1.0, dz=0.05, pad_left=30.0, pad_right=30.0)
    f = init_wavepacket(WavePacketSpec(k0=k0, sigma_k=0.5, z0=-12.0), g, params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return propagate(f, params, coupling_off(), dt=0.01, n_steps=n_steps)


def synthetic(times, p_e):
    p_e = np.asarray(p_e, dtype=float)
    return Trajectory(times=np.asarray(times, dtype=float),
                      norms=np.ones_like(p_e), p_e=p_e, p_g=1.0 - p_e,
                      inversion=2.0 * p_e - 1.0, snapshots=[])


# =====================================================================
# exactness guarantees
# =====================================================================


def test_initial_inversion_is_exactly_one(detuned):
    traj = tiny_run(detuned, n_steps=5)
    series = series_from_trajectory(traj)
    assert series.inversion[0] == 1.0
    assert series.p_e[0] == 1.0
    assert series.p_g[0] == 0.0


def test_uncoupled_inversion_stays_exactly_one(detuned):
    # f = 0: populations are fractions of the norm, so W(t) == 1.0 exactly
    traj = tiny_run(detuned, n_steps=150)
    series = series_from_trajectory(traj)
    assert np.all(series.inversion == 1.0)
    assert np.all(series.p_g == 0.0)


def test_single_sector_aggregation_is_identity(resonant):
    traj = tiny_run(resonant, n_steps=20)
    agg = aggregate_inversion([traj], [1.0])
    assert np.array_equal(agg.inversion, traj.inversion)
    assert np.array_equal(agg.p_e, traj.p_e)
    assert np.array_equal(agg.norm, traj.norms)
    assert np.array_equal(agg.times, traj.times)


# =====================================================================
# mixing
# =====================================================================


def test_even_mix_is_mean():
    times = np.linspace(0.0, 1.0, 11)
    t1 = synthetic(times, np.linspace(1.0, 0.4, 11))
    t2 = synthetic(times, np.linspace(1.0, 0.8, 11))
    agg = aggregate_inversion([t1, t2], [0.5, 0.5])
    expected = 0.5 * (t1.inversion + t2.inversion)
    np.testing.assert_allclose(agg.inversion, expected, atol=1e-15)


def test_mix_is_linear_in_weights():
    times = np.linspace(0.0, 2.0, 21)
    rng = np.random.default_rng(7)
    trajs = [synthetic(times, rng.uniform(0.0, 1.0, 21)) for _ in range(3)]
    w = [0.2, 0.3, 0.5]
    agg = aggregate_inversion(trajs, w)
    expected = sum(wi * t.p_e for wi, t in zip(w, trajs))
    np.testing.assert_allclose(agg.p_e, expected, atol=1e-15)
    np.testing.assert_allclose(agg.inversion, agg.p_e - agg.p_g, atol=1e-15)


def test_weights_renormalized_within_tolerance():
    times = np.linspace(0.0, 1.0, 5)
    t1 = synthetic(times, np.full(5, 0.9))
    # off by 3e-10: accepted and exactly renormalized
    agg = aggregate_inversion([t1], [1.0 + 3e-10])
    assert agg.p_e[0] == pytest.approx(0.9, abs=1e-15)


# =====================================================================
# validation
# =====================================================================


def test_weight_validation():
    times = np.linspace(0.0, 1.0, 5)
    t1 = synthetic(times, np.full(5, 0.9))
    t2 = synthetic(times, np.full(5, 0.5))
    with pytest.raises(InvalidParameterError):
        aggregate_inversion([t1, t2], [0.5, 0.6])
    with pytest.raises(InvalidParameterError):
        aggregate_inversion([t1, t2], [-0.1, 1.1])
    with pytest.raises(InvalidParameterError):
        aggregate_inversion([t1, t2], [1.0])
    with pytest.raises(InvalidParameterError):
        aggregate_inversion([], [])


def test_time_grid_mismatch_rejected():
    t1 = synthetic(np.linspace(0.0, 1.0, 5), np.full(5, 0.9))
    t2 = synthetic(np.linspace(0.0, 2.0, 5), np.full(5, 0.5))
    with pytest.raises(GridMismatchError):
        aggregate_inversion([t1, t2], [0.5, 0.5])


def test_series_length_validation():
    from mazerlab import ObservableSeries
    with pytest.raises(InvalidParameterError):
        ObservableSeries(times=np.zeros(3), norm=np.zeros(3), p_e=np.zeros(2),
                         p_g=np.zeros(3), inversion=np.zeros(3))


def test_rows_roundtrip():
    times = np.linspace(0.0, 1.0, 3)
    series = series_from_trajectory(synthetic(times, np.array([1.0, 0.6, 0.2])))
    rows = list(series.rows())
    assert len(rows) == 3
    assert rows[1] == (0.5, 1.0, 0.6, 0.4, pytest.approx(0.2))
