import importlib

import numpy as np
import pytest

from petzlab import _jacobi_py, _kernels
from petzlab.ensemble import SplitMix64, random_hermitian, random_unitary

try:
    from petzlab import _jacobi
except ImportError:  # extension not built
    _jacobi = None

needs_ext = pytest.mark.skipif(_jacobi is None, reason="compiled kernel not built")


def _sorted(w, v):
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@pytest.mark.parametrize("n", [1, 2, 3, 5, 16])
def test_python_kernel_diagonalizes(n):
    a = random_hermitian(SplitMix64(n), n).data
    w, v, sweeps, off = _jacobi_py.jacobi_eigh(a.copy(), 1e-15, 100)
    assert sweeps <= 100
    assert np.max(np.abs((v * w) @ v.conj().T - a)) < 1e-12
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-12)


def test_python_kernel_does_not_modify_input():
    a = random_hermitian(SplitMix64(3), 4).data
    before = a.copy()
    _jacobi_py.jacobi_eigh(a, 1e-15, 100)
    assert np.array_equal(a, before)


def test_kernel_reports_sweep_cap():
    a = random_hermitian(SplitMix64(9), 6).data
    _, _, sweeps, off = _jacobi_py.jacobi_eigh(a, 1e-15, 1)
    assert sweeps == 2 and off > 0


@needs_ext
@pytest.mark.parametrize("n", [2, 4, 8, 24])
def test_compiled_matches_python(n):
    rng = SplitMix64(100 + n)
    a = random_hermitian(rng, n).data
    wc, vc, sc, _ = _jacobi.jacobi_eigh(a, 1e-15, 100)
    wp, vp, sp, _ = _jacobi_py.jacobi_eigh(a, 1e-15, 100)
    wc, vc = _sorted(wc, vc)
    wp, vp = _sorted(wp, vp)
    assert np.allclose(wc, wp, atol=1e-12)
    assert np.max(np.abs((vc * wc) @ vc.conj().T - a)) < 1e-12
    # eigenvectors agree up to phase for a non-degenerate spectrum
    overlap = np.abs(np.sum(vc.conj() * vp, axis=0))
    assert np.allclose(overlap, 1.0, atol=1e-9)


@needs_ext
def test_compiled_handles_degenerate_input():
    rng = SplitMix64(5)
    u = random_unitary(rng, 5)
    a = u @ np.diag([0.0, 0.0, 1.0, 1.0, 1.0]) @ u.conj().T
    w, v, _, _ = _jacobi.jacobi_eigh(a, 1e-15, 100)
    assert np.max(np.abs((v * w) @ v.conj().T - a)) < 1e-12


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("PETZLAB_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.jacobi_eigh is _jacobi_py.jacobi_eigh
    finally:
        monkeypatch.delenv("PETZLAB_PURE_PYTHON")
        importlib.reload(_kernels)
    if _jacobi is not None:
        assert _kernels.BACKEND == "cython"
