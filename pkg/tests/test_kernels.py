import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfpsro import kernels, oracles
from sfpsro.kernels import _fallback

try:
    from sfpsro.kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled kernels not built")


def antisym(seed, n):
    U = np.random.default_rng(seed).uniform(-1, 1, size=(n, n))
    return np.triu(U, 1) - np.triu(U, 1).T


def hull_qp(V, x):
    return V @ V.T, V @ x, float(x @ x)


def test_backend_matches_import():
    assert kernels.BACKEND == ("compiled" if _core is not None else "python")


@pytest.mark.parametrize("impl", [_fallback, _core], ids=["python", "compiled"])
def test_rm_plus_symmetric_rps(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    P = np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], dtype=float)
    x, res, it = impl.rm_plus_symmetric(P, 20_000, 1e-6, 50)
    assert res <= 1e-6 and np.allclose(x, 1 / 3, atol=1e-5)
    assert abs(x.sum() - 1) <= 1e-12


@pytest.mark.parametrize("impl", [_fallback, _core], ids=["python", "compiled"])
def test_rm_plus_bimatrix_value(impl):
    if impl is None:
        pytest.skip("compiled kernels not built")
    A = np.random.default_rng(3).uniform(-1, 1, size=(4, 3))
    v, _, _ = oracles.support_enumeration_value(A)
    x, y, gap, _ = impl.rm_plus_bimatrix(A, 200_000, 1e-7, 50)
    assert gap <= 1e-7
    assert x @ A @ y == pytest.approx(v, abs=1e-6)


@needs_core
@pytest.mark.parametrize("seed", range(6))
def test_rm_plus_backends_agree(seed):
    P = antisym(seed, 7)
    a = _fallback.rm_plus_symmetric(P, 5000, 1e-9, 25)
    b = _core.rm_plus_symmetric(P, 5000, 1e-9, 25)
    assert a[2] == b[2]
    assert np.allclose(a[0], b[0], atol=1e-12) and a[1] == pytest.approx(b[1], abs=1e-12)
    A = np.random.default_rng(seed).uniform(-1, 1, size=(5, 6))
    a = _fallback.rm_plus_bimatrix(A, 5000, 1e-9, 25)
    b = _core.rm_plus_bimatrix(A, 5000, 1e-9, 25)
    assert a[3] == b[3]
    assert np.allclose(a[0], b[0], atol=1e-12) and np.allclose(a[1], b[1], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_fw_distance_matches_grid_oracle_and_backends(k, d, seed):
    rng = np.random.default_rng(seed)
    V = rng.uniform(-1, 1, size=(k, d))
    x = rng.uniform(-1.5, 1.5, size=d)
    w, val, _ = _fallback.fw_simplex_qp(*hull_qp(V, x), 500, 1e-12)
    assert w.min() >= 0 and abs(w.sum() - 1) <= 1e-9
    assert val == pytest.approx(float(np.sum((w @ V - x) ** 2)), abs=1e-9)
    if k <= 2:
        assert val == pytest.approx(oracles.grid_hull_distance(list(V), x), abs=1e-6)
    if _core is not None:
        wc, vc, _ = _core.fw_simplex_qp(*hull_qp(V, x), 500, 1e-12)
        assert vc == pytest.approx(val, abs=1e-10)


def test_fw_inside_hull_is_zero():
    V = np.eye(3)
    for impl in filter(None, (_fallback, _core)):
        _, val, _ = impl.fw_simplex_qp(*hull_qp(V, np.full(3, 1 / 3)), 100, 1e-12)
        assert val <= 1e-12
