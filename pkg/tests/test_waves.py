import math

import numpy as np
import pytest

from risim.waves import (ETA_0, ScenarioGeometry, WaveEnvironment, fraunhofer_distance,
                         reference_environment, reference_geometry, wavevector)


def test_environment_invariants():
    env = WaveEnvironment.from_frequency(28e9, p_inc=1.0)
    assert env.wavelength == pytest.approx(299792458.0 / 28e9)
    assert env.wavenumber == pytest.approx(2 * math.pi / env.wavelength)
    assert env.e_inc == pytest.approx(math.sqrt(2 * env.p_inc * env.eta0))
    assert 376.7 < ETA_0 < 376.8


def test_environment_rejects_nonpositive():
    with pytest.raises(ValueError):
        WaveEnvironment.from_frequency(-1.0)


def test_wavevector_directions():
    env = WaveEnvironment.from_frequency(28e9)
    k = env.wavenumber
    down = wavevector(env, 0.0, "incident")
    assert np.allclose(down, [0.0, 0.0, -k])
    up = wavevector(env, 0.0, "reflected")
    assert np.allclose(up, [0.0, 0.0, k])
    oblique = wavevector(env, math.radians(30.0), "reflected")
    assert oblique[1] == pytest.approx(k / 2)
    assert oblique[2] == pytest.approx(k * math.sqrt(3) / 2)


def test_wavevector_magnitude_is_k():
    env = WaveEnvironment.from_frequency(5e9)
    for theta in np.linspace(0.0, math.pi / 2 * 0.999, 37):
        for direction in ("incident", "reflected"):
            vec = wavevector(env, theta, direction)
            assert np.linalg.norm(vec) == pytest.approx(env.wavenumber, rel=1e-12)


def test_fraunhofer_distance():
    env = WaveEnvironment.from_frequency(28e9, c=3e8)
    lam = env.wavelength
    geom = ScenarioGeometry.from_cell_count(0.0, 0.5, half_length_x=0.5,
                                            half_length_y=0.25, n_cells=100)
    # direct arithmetic of the printed threshold
    assert fraunhofer_distance(geom, env) == pytest.approx(8 * (0.5**2 + 0.25**2) / lam)
    tiny = ScenarioGeometry.from_cell_count(0.0, 0.5, half_length_x=0.0,
                                            half_length_y=lam, n_cells=4)
    assert fraunhofer_distance(tiny, env) == pytest.approx(8 * lam)


def test_reference_setup_matches_published_numbers():
    env = reference_environment()
    assert env.wavelength == pytest.approx(10.7e-3, rel=2e-3)
    assert env.eta0 == 377.0
    assert env.e_inc == pytest.approx(27.45, abs=0.01)
    geom = reference_geometry(30.0)
    assert geom.n_cells == 1493
    assert geom.cell_size == pytest.approx(env.wavelength / 32)


def test_grid_is_symmetric_and_consistent():
    for n in (1, 2, 7, 64, 1493):
        geom = ScenarioGeometry.from_cell_count(0.0, 0.3, half_length_x=0.5,
                                                half_length_y=0.25, n_cells=n)
        y = geom.y_samples
        assert y.size == n
        assert abs(np.sum(y)) < 1e-12 * max(1, n)
        assert np.all(y > -geom.half_length_y) and np.all(y < geom.half_length_y)
        assert n * geom.cell_size == pytest.approx(2 * geom.half_length_y, rel=1e-12)


def test_from_cell_size_snaps_aperture():
    geom = ScenarioGeometry.from_cell_size(0.0, 0.4, half_length_x=0.5,
                                           half_length_y=0.25, cell_size=3.348e-4)
    assert geom.n_cells == round(0.5 / 3.348e-4)
    assert geom.n_cells * geom.cell_size == pytest.approx(2 * geom.half_length_y, rel=1e-12)


def test_angle_domain_enforced():
    with pytest.raises(ValueError):
        ScenarioGeometry.from_cell_count(0.0, math.pi / 2, 0.5, 0.25, 10)
