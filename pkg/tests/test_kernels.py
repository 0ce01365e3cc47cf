import json
import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import hyp2f1

from hartree import _core_py, kernels
from hartree.constants import sphere_area

try:
    from hartree import _core
except ImportError:
    _core = None

compiled = pytest.mark.skipif(_core is None, reason="compiled core not built")


@pytest.mark.parametrize("N", [5, 6, 7, 8, 10])
def test_angular_integral_hypergeometric(N):
    t = np.concatenate([[0.0], np.linspace(0.01, 0.97, 25)])
    got = sphere_area(N - 1) * kernels.angular_integral(t, N)
    ref = sphere_area(N) * hyp2f1(2, 3 - N / 2, N / 2, t * t)
    assert_allclose(got, ref, rtol=1e-12)


def test_angular_integral_near_diagonal():
    # dimension six: exact spherical mean of |x|^-4 is sigma_5 max(r,s)^-4
    t = 1 - np.geomspace(1e-12, 1e-2, 11)
    got = sphere_area(5) * kernels.angular_integral(t, 6)
    assert_allclose(got, np.full_like(t, sphere_area(6)), rtol=1e-10)


def test_pair_kernel_symmetric_zero_diagonal():
    r = np.geomspace(0.01, 10, 40)
    K = kernels.pair_kernel(r, 7, 4)
    assert_allclose(K, K.T, rtol=0, atol=0)
    assert np.all(np.diag(K) == 0)
    assert np.all(K >= 0)


def test_matvec_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.random((50, 70))
    x = rng.random(70)
    assert_allclose(kernels.matvec(a, x), a @ x, rtol=1e-13)


@compiled
@pytest.mark.parametrize("N", [5, 8])
def test_backends_agree(N):
    r = np.geomspace(1e-3, 20, 60)
    t = np.linspace(0, 0.999, 101)
    assert_allclose(_core.angular_integral(t, N, 1), _core_py.angular_integral(t, N, 1), rtol=1e-13)
    assert_allclose(_core.pair_kernel(r, N, 4, 1), _core_py.pair_kernel(r, N, 4, 1), rtol=1e-13)


@compiled
def test_compiled_thread_count_invariance():
    r = np.geomspace(1e-3, 20, 200)
    a = _core.pair_kernel(r, 5, 4, 1)
    b = _core.pair_kernel(r, 5, 4, 4)
    assert np.array_equal(a, b)
    x = np.random.default_rng(0).random(200)
    assert np.array_equal(_core.row_matvec(a, x, 1), _core.row_matvec(a, x, 4))


def test_thread_env(monkeypatch):
    monkeypatch.setenv("HARTREE_THREADS", "3")
    assert kernels.num_threads() == 3
    monkeypatch.setenv("HARTREE_THREADS", "0")
    with pytest.raises(ValueError):
        kernels.num_threads()


def _identity_via(backend):
    code = (
        "import json, hartree.kernels as k; from hartree.riesz import identity_check; "
        "from hartree.radial import make_grid; "
        "print(json.dumps([k.BACKEND, identity_check(make_grid(7, M=256), 2)['relative_residuals']]))"
    )
    env = dict(os.environ, HARTREE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_python_backend_selected_and_consistent():
    name, res_py = _identity_via("python")
    assert name == "python"
    _, res_default = _identity_via("")
    assert_allclose(res_py, res_default, rtol=1e-6, atol=1e-12)
