import numpy as np
import pytest

from coref_meter import _kernels

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="extension not built")
rng = np.random.default_rng(0)


def both(name, *args):
    return getattr(_kernels.python, name)(*args), getattr(_kernels.compiled, name)(*args)


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")


@needs_compiled
def test_window_stats_parity():
    for _ in range(50):
        w = np.ascontiguousarray(rng.normal(size=(int(rng.integers(0, 200)), 3)))
        py, c = both("window_stats", w)
        assert py == c


@needs_compiled
def test_auc_halves_parity():
    for _ in range(50):
        p = np.sort(rng.integers(0, 6, size=int(rng.integers(1, 40))).astype(float))
        n = np.sort(rng.integers(0, 6, size=int(rng.integers(1, 40))).astype(float))
        py, c = both("auc_halves", p, n)
        assert py == c


@needs_compiled
def test_flip_parity():
    flips = rng.integers(0, 2, size=(300, 17), dtype=np.uint8)
    diffs = rng.normal(size=17)
    py, c = both("flip_mean_stats", diffs, flips)
    assert np.array_equal(py, c)
    a = np.ascontiguousarray(rng.integers(0, 9, size=(17, 12)).astype(float))
    b = np.ascontiguousarray(rng.integers(0, 9, size=(17, 12)).astype(float))
    py, c = both("flip_f1_stats", a, b, flips)
    assert np.array_equal(py, c)


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("COREF_METER_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python" and mod.window_stats is mod.python.window_stats
    finally:
        monkeypatch.delenv("COREF_METER_PURE_PYTHON")
        importlib.reload(_kernels)
