import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlap import _kernels

PATHS = {"numba": _kernels.NUMBA_KERNELS, "numpy": _kernels.NUMPY_KERNELS}


def _random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


@pytest.mark.parametrize("path", sorted(PATHS))
@pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 33])
def test_symeig_matches_eigh(path, n):
    a = _random_symmetric(np.random.default_rng(n), n)
    w, v = PATHS[path]["symeig"](a.copy())
    order = np.argsort(w)
    assert np.allclose(w[order], np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(a @ v, v * w, atol=1e-11)


@pytest.mark.parametrize("path", sorted(PATHS))
def test_symeig_degenerate_and_zero(path):
    for a in (np.zeros((4, 4)), np.eye(5) * 3.0, 4 * np.eye(4) - np.ones((4, 4))):
        w, v = PATHS[path]["symeig"](a.copy())
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-12)
        assert np.allclose(a @ v, v * w, atol=1e-12)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_kernel_paths_agree(n, seed):
    a = _random_symmetric(np.random.default_rng(seed), n)
    w1, _ = PATHS["numba"]["symeig"](a.copy())
    w2, _ = PATHS["numpy"]["symeig"](a.copy())
    assert np.allclose(np.sort(w1), np.sort(w2), atol=1e-12)


@pytest.mark.parametrize("symmetric", [False, True])
def test_trotter_rows_paths_agree(symmetric):
    rng = np.random.default_rng(5)
    block = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    us = np.array([0, 1, 2, 5], dtype=np.int64)
    vs = np.array([1, 2, 5, 7], dtype=np.int64)
    beta = (np.exp(0.3j) - 1) / 2
    a, b = block.copy(), block.copy()
    PATHS["numba"]["trotter_rows"](a, us, vs, beta, 7, symmetric)
    PATHS["numpy"]["trotter_rows"](b, us, vs, beta, 7, symmetric)
    assert np.allclose(a, b, atol=1e-13)


def test_env_flag_selects_numpy_path():
    code = "import qlap._kernels as k; print(k.USING_NUMBA)"
    env = dict(os.environ, QLAP_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "False"
    env["QLAP_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "True"
