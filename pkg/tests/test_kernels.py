"""Backend parity and correctness of the compiled/fallback kernel pair."""

import subprocess
import sys

import numpy as np
import pytest

from selseg import kernels
from selseg.kernels import numba_impl, numpy_impl
from selseg.solver import SolverConfig, taylor_coefficient

IMPLS = [numba_impl, numpy_impl]


def test_backend_exports():
    assert kernels.BACKEND in ("numba", "numpy")
    assert kernels.BIG == 1e30
    assert callable(kernels.solve_eikonal)
    assert callable(kernels.solve_tridiag_batch)
    assert callable(kernels.aos_update)


def test_env_var_selects_numpy_backend():
    code = (
        "from selseg import kernels\n"
        "assert kernels.BACKEND == 'numpy', kernels.BACKEND\n"
    )
    subprocess.run(
        [sys.executable, "-c", code],
        check=True,
        env={"PATH": "/usr/bin:/bin", "SELSEG_BACKEND": "numpy"},
    )


def test_env_var_rejects_unknown_backend():
    code = (
        "try:\n"
        "    from selseg import kernels\n"
        "except ValueError:\n"
        "    raise SystemExit(0)\n"
        "raise SystemExit(1)\n"
    )
    subprocess.run(
        [sys.executable, "-c", code],
        check=True,
        env={"PATH": "/usr/bin:/bin", "SELSEG_BACKEND": "cuda"},
    )


@pytest.mark.parametrize("impl", IMPLS)
def test_tridiag_matches_dense_solve(impl):
    rng = np.random.default_rng(42)
    for batch, n in [(1, 2), (3, 5), (7, 31)]:
        lower = rng.uniform(-1.0, 1.0, (batch, n))
        upper = rng.uniform(-1.0, 1.0, (batch, n))
        diag = 4.0 + rng.uniform(0.0, 1.0, (batch, n))
        rhs = rng.uniform(-1.0, 1.0, (batch, n))
        got = impl.solve_tridiag_batch(lower, diag, upper, rhs)
        for k in range(batch):
            dense = np.diag(diag[k])
            for i in range(1, n):
                dense[i, i - 1] = lower[k, i]
                dense[i - 1, i] = upper[k, i - 1]
            expect = np.linalg.solve(dense, rhs[k])
            assert np.allclose(got[k], expect, atol=1e-12, rtol=1e-12)


def test_tridiag_backends_agree_exactly():
    rng = np.random.default_rng(3)
    lower = rng.uniform(-1.0, 1.0, (9, 17))
    upper = rng.uniform(-1.0, 1.0, (9, 17))
    diag = 4.0 + rng.uniform(0.0, 1.0, (9, 17))
    rhs = rng.uniform(-1.0, 1.0, (9, 17))
    a = numba_impl.solve_tridiag_batch(lower, diag, upper, rhs)
    b = numpy_impl.solve_tridiag_batch(lower, diag, upper, rhs)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("impl", IMPLS)
def test_eikonal_uniform_speed_single_source(impl):
    n = 17
    seed = np.full((n, n), kernels.BIG)
    seed[8, 8] = 0.0
    q = np.ones((n, n))
    dist = impl.solve_eikonal(seed, q)
    assert dist[8, 8] == 0.0
    # Axis neighbors are exact; the solver never undershoots Euclid.
    assert dist[8, 9] == pytest.approx(1.0, abs=1e-9)
    assert dist[8, 0] == pytest.approx(8.0, abs=1e-6)
    ys, xs = np.mgrid[0:n, 0:n]
    euclid = np.hypot(xs - 8, ys - 8)
    assert np.all(dist >= euclid - 1e-9)


def test_eikonal_backends_share_fixed_point():
    rng = np.random.default_rng(11)
    for trial in range(4):
        q = rng.uniform(0.2, 2.0, (12, 12))
        seed = np.full((12, 12), kernels.BIG)
        seed[rng.integers(0, 12), rng.integers(0, 12)] = 0.0
        a = numba_impl.solve_eikonal(seed, q)
        b = numpy_impl.solve_eikonal(seed, q)
        assert np.allclose(a, b, atol=1e-7, rtol=0.0), trial


def test_eikonal_preserves_input_and_sources():
    seed = np.full((6, 6), kernels.BIG)
    seed[2, 3] = 0.0
    before = seed.copy()
    dist = kernels.solve_eikonal(seed, np.ones((6, 6)))
    assert np.array_equal(seed, before)
    assert dist[2, 3] == 0.0
    assert np.all(np.isfinite(dist)) and np.all(dist < kernels.BIG)


def test_aos_update_backends_bitwise_equal():
    rng = np.random.default_rng(7)
    cfg = SolverConfig()
    coeff = taylor_coefficient(cfg.eps2)
    for shape in [(3, 3), (8, 8), (13, 9), (1, 7), (7, 1), (64, 64)]:
        u = rng.uniform(-0.2, 1.2, shape)
        F = rng.uniform(-1.0, 1.0, shape)
        g = rng.uniform(0.1, 1.0, shape)
        args = (
            u,
            F,
            g,
            cfg.lambda_tilde,
            cfg.penalty_weight,
            cfg.mu,
            cfg.tau,
            cfg.eps1,
            cfg.eps2,
            cfg.zeta,
            coeff,
        )
        a = numba_impl.aos_update(*args)
        b = numpy_impl.aos_update(*args)
        assert np.abs(a - b).max() <= 1e-13, shape
