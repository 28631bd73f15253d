import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import mp_range_difference
from tdoa.errors import ConfigError, DegenerateGeometryError
from tdoa.model import (
    FIXED_SENSORS,
    MeasurementSet,
    NoiseModel,
    SensorArray,
    deploy_fixed_paper_array,
    deploy_uniform_cube,
    load_array_csv,
    load_measurements_csv,
    make_rng,
    range_difference,
    range_differences,
    save_array_csv,
    save_measurements_csv,
    simulate,
)


def test_range_difference_worked_example():
    arr = SensorArray([0, 0, 0], [[50, 0, 50]])
    got = range_difference(arr, [52, 52, 52], 1)
    expected = float(mp_range_difference([50, 0, 50], [0, 0, 0], [52, 52, 52]))
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(-37.9898, abs=1e-4)


def test_range_difference_midpoint_is_zero():
    a1 = np.array([30.0, -40.0, 12.0])
    arr = SensorArray(np.zeros(3), [a1])
    assert range_difference(arr, a1 / 2, 1) == pytest.approx(0.0, abs=1e-12)


def test_range_difference_nonzero_reference_matches_high_precision():
    ref = [3.0, -7.0, 11.0]
    arr = SensorArray(ref, [[50, 0, 50], [-20, 5, 1]])
    x = [15.0, 15.0, 15.0]
    for i, a_i in enumerate(arr.sensors, start=1):
        assert range_difference(arr, x, i) == pytest.approx(float(mp_range_difference(a_i, ref, x)), rel=1e-13)


def test_range_difference_errors():
    arr = SensorArray(np.zeros(2), [[10, 0], [0, 10]])
    with pytest.raises(IndexError):
        range_difference(arr, [1, 1], 3)
    with pytest.raises(IndexError):
        range_difference(arr, [1, 1], 0)
    with pytest.raises(DegenerateGeometryError):
        range_difference(arr, [10, 0], 1)
    with pytest.raises(DegenerateGeometryError):
        range_difference(arr, [0, 0], 2)


def test_sensor_array_validation():
    with pytest.raises(ConfigError):
        SensorArray([0, 0, 0, 0], [[1, 2, 3, 4]])
    with pytest.raises(ConfigError):
        SensorArray([0, 0], [[1, 2, 3]])
    with pytest.raises(DegenerateGeometryError):
        SensorArray([1, 1], [[1, 1], [2, 3]])
    with pytest.raises(ConfigError):
        NoiseModel(-1.0)


def test_simulate_zero_noise_is_exact():
    arr = deploy_fixed_paper_array(2)
    meas = simulate(arr, [52, 52, 52], NoiseModel(0.0, seed=4))
    np.testing.assert_array_equal(meas.d, range_differences(arr, [52, 52, 52]))
    assert meas.true_sigma2 == 0.0


def test_simulate_is_deterministic_given_seed():
    arr = deploy_uniform_cube(100, 50, seed=1)
    a = simulate(arr, [15, 15, 15], NoiseModel(10.0, seed=99))
    b = simulate(arr, [15, 15, 15], NoiseModel(10.0, seed=99))
    c = simulate(arr, [15, 15, 15], NoiseModel(10.0, seed=100))
    np.testing.assert_array_equal(a.d, b.d)
    assert not np.array_equal(a.d, c.d)


def test_simulate_residual_variance_cube_regime():
    x = np.array([15.0, 15.0, 15.0])
    arr = deploy_uniform_cube(100, 100_000, seed=7)
    meas = simulate(arr, x, NoiseModel(10.0, seed=8))
    r = meas.d - range_differences(arr, x)
    # chi^2_m / m has relative sd sqrt(2/m) ~ 0.45% here
    assert np.mean(r**2) == pytest.approx(100.0, rel=0.05)


def test_residual_variance_converges_with_m():
    x = np.array([15.0, 15.0, 15.0])
    errs = {}
    for m in (1_000, 100_000):
        dev = []
        for t in range(20):
            arr = deploy_uniform_cube(100, m, rng=make_rng(3, m, t))
            meas = simulate(arr, x, NoiseModel(10.0), rng=make_rng(4, m, t))
            dev.append(np.mean((meas.d - range_differences(arr, x)) ** 2) - 100.0)
        errs[m] = np.sqrt(np.mean(np.square(dev)))
    # O(1/sqrt(m)): factor 10 expected; allow Monte-Carlo slack
    assert 5 < errs[1_000] / errs[100_000] < 20


def test_cube_sensors_on_surface():
    arr = deploy_uniform_cube(100, 3000, seed=2)
    assert arr.m == 3000
    np.testing.assert_allclose(np.max(np.abs(arr.sensors), axis=1), 50.0)
    np.testing.assert_array_equal(arr.reference, np.zeros(3))


def test_cube_face_counts_binomial():
    arr = deploy_uniform_cube(100, 6000, seed=11)
    s = arr.sensors
    face = np.argmax(np.abs(s), axis=1) * 2 + (s[np.arange(len(s)), np.argmax(np.abs(s), axis=1)] > 0)
    counts = np.bincount(face, minlength=6)
    sd = np.sqrt(6000 * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - 1000) < 3 * sd), counts


def test_cube_too_few_sensors():
    with pytest.raises(ConfigError):
        deploy_uniform_cube(100, 5)
    with pytest.raises(ConfigError):
        deploy_uniform_cube(0, 10)


def test_fixed_array_matches_listing():
    arr = deploy_fixed_paper_array(1)
    assert arr.m == 10
    np.testing.assert_array_equal(arr.sensors[0], [50, 0, 50])
    np.testing.assert_array_equal(arr.sensors[1], [50, 50, -50])
    np.testing.assert_array_equal(arr.sensors[-1], [-50, -50, -50])
    np.testing.assert_array_equal(arr.sensors, FIXED_SENSORS)


@pytest.mark.parametrize("T", [3, 300])
def test_fixed_array_repeats(T):
    arr = deploy_fixed_paper_array(T)
    assert arr.m == 10 * T
    rows, counts = np.unique(arr.sensors, axis=0, return_counts=True)
    assert len(rows) == 10
    assert np.all(counts == T)


def test_fixed_array_rejects_zero():
    with pytest.raises(ConfigError):
        deploy_fixed_paper_array(0)


def test_array_csv_round_trip(tmp_path):
    arr = SensorArray([1.0 / 3, -2.5, 7.0], make_rng(1).normal(size=(12, 3)) * 40)
    path = tmp_path / "sensors.csv"
    save_array_csv(arr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dim,n_sensors"
    assert lines[1] == "3,12"
    back = load_array_csv(path)
    np.testing.assert_array_equal(back.reference, arr.reference)
    np.testing.assert_array_equal(back.sensors, arr.sensors)


def test_array_csv_bad_shape(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("dim,n_sensors\n2,3\n0,0\n1,1\n")
    with pytest.raises(ConfigError):
        load_array_csv(path)


def test_measurement_csv_round_trip(tmp_path):
    arr = deploy_fixed_paper_array(1)
    meas = simulate(arr, [52, 52, 52], NoiseModel(5.0, seed=3))
    save_measurements_csv(meas, tmp_path / "m.csv")
    back = load_measurements_csv(tmp_path / "m.csv", arr)
    np.testing.assert_array_equal(back.d, meas.d)


def test_measurement_length_checked():
    with pytest.raises(ConfigError):
        MeasurementSet(deploy_fixed_paper_array(1), np.zeros(9))


coords = arrays(np.float64, 3, elements=st.floats(-200, 200))


@settings(max_examples=100, deadline=None)
@given(a=coords, x=coords, ref=coords, shift=coords)
def test_translation_equivariance(a, x, ref, shift):
    if min(np.linalg.norm(a - ref), np.linalg.norm(x - a), np.linalg.norm(x - ref)) < 1e-3:
        return
    base = range_difference(SensorArray(ref, [a]), x, 1)
    moved = range_difference(SensorArray(ref + shift, [a + shift]), x + shift, 1)
    assert moved == pytest.approx(base, abs=1e-9 * (1 + np.abs(shift).max()))
