import math
import os
import subprocess
import sys

import numpy as np
import pytest

from psector import _kernels


def random_system(n, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.random((n, n))
    u[0, :], u[-1, :], u[:, 0], u[:, -1] = 0.0, 1.0, 0.0, 0.0
    coef = [rng.random((n, n)) + 0.1 for _ in range(4)]
    return u, coef


@pytest.mark.skipif(not _kernels._HAVE_NUMBA, reason="numba unavailable")
def test_paths_agree_bitwise():
    u, coef = random_system(40)
    v = u.copy()
    omega = 1.9
    for _ in range(25):
        for color in (0, 1):
            _kernels._sor_color_py(u, *coef, omega, color)
            _kernels._sor_color_nb(v, *coef, omega, color)
    assert np.array_equal(u, v)


def test_sweep_solves_laplace():
    # unit-coefficient sweeps must converge to the 5-point harmonic solution
    n = 33
    u = np.zeros((n, n))
    u[-1, :] = 1.0
    ones = np.ones((n, n))
    omega = 2.0 / (1.0 + math.sin(math.pi / n))
    for _ in range(400):
        _kernels.sor_sweep(u, ones, ones, ones, ones, omega)
    # interior harmonic: each value is the mean of its 4 neighbors
    resid = np.abs(
        u[1:-1, 1:-1]
        - 0.25 * (u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:])
    )
    assert resid.max() <= 1e-12
    assert u.min() >= 0.0 and u.max() <= 1.0


def test_dirichlet_rows_untouched():
    u, coef = random_system(20, seed=3)
    edges = (u[0, :].copy(), u[-1, :].copy(), u[:, 0].copy(), u[:, -1].copy())
    _kernels.sor_sweep(u, *coef, 1.8)
    assert np.array_equal(u[0, :], edges[0])
    assert np.array_equal(u[-1, :], edges[1])
    assert np.array_equal(u[:, 0], edges[2])
    assert np.array_equal(u[:, -1], edges[3])


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PSECTOR_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from psector._kernels import backend; print(backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_backend_reports_active_path():
    assert _kernels.backend() in ("numba", "numpy")
