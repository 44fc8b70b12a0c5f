import os
import subprocess
import sys

import numpy as np

from polaron import kernels
from polaron._kernels_py import energy_norm_gradient as py_kernel


def _random_state(rng, n, m):
    while True:
        c = rng.uniform(-1.0, 1.0, n)
        f = 0.5 * rng.standard_normal((n, m))
        km = np.exp(-0.5 * ((f[:, None, :] - f[None, :, :]) ** 2).sum(-1))
        if abs(2.0 * c @ km @ c) > 1e-6:
            return c, f


def test_compiled_backend_selected_by_default():
    # the build ships the compiled extension; import must have picked it
    assert kernels.BACKEND in ("cython", "python")
    if os.environ.get("POLARON_PURE_PYTHON") != "1":
        assert kernels.BACKEND == "cython"


def test_pure_python_env_forces_fallback():
    code = (
        "from polaron import kernels; print(kernels.BACKEND)"
    )
    env = dict(os.environ, POLARON_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "python"


def test_backends_agree_on_random_states():
    rng = np.random.default_rng(7)
    delta = 0.3
    for _ in range(40):
        n = rng.integers(1, 5)
        m = rng.integers(1, 9)
        omega = rng.uniform(0.05, 2.0, m)
        g = rng.uniform(0.01, 1.0, m)
        c, f = _random_state(rng, n, m)
        ref = py_kernel(delta, omega, g, c, f)
        got = kernels.energy_norm_gradient(delta, omega, g, c, f)
        assert np.isclose(got[0], ref[0], rtol=1e-13, atol=1e-15)
        assert np.isclose(got[1], ref[1], rtol=1e-13, atol=1e-15)
        assert np.allclose(got[2], ref[2], rtol=1e-12, atol=1e-14)
        assert np.allclose(got[3], ref[3], rtol=1e-12, atol=1e-14)


def test_backends_accept_readonly_arrays():
    omega = np.array([0.5, 1.0])
    g = np.array([0.2, 0.3])
    c = np.array([1.0])
    f = np.array([[0.1, 0.2]])
    for arr in (omega, g, c, f):
        arr.setflags(write=False)
    e, norm, gc, gf = kernels.energy_norm_gradient(0.1, omega, g, c, f)
    assert np.isfinite(e) and norm > 0


def test_degenerate_norm_signalled_with_nan():
    # C = (1, -1) with identical displacement rows has exactly zero norm
    omega = np.array([1.0])
    g = np.array([0.5])
    c = np.array([1.0, -1.0])
    f = np.array([[0.3], [0.3]])
    e, norm, gc, gf = kernels.energy_norm_gradient(0.1, omega, g, c, f)
    assert not np.isfinite(e)
    assert abs(norm) < 1e-12
