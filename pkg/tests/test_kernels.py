"""The compiled and pure-Python inner loops agree."""
import numpy as np
import pytest

from marginlab import _kernels, canonical, generate_separable

pytestmark = pytest.mark.skipif(len(_kernels.backends()) < 2, reason="compiled backend not built")

DATA = [canonical("D2"), canonical("D3"), generate_separable(25, 4, 0.1, 3)]
REC = np.array([1, 2, 5, 17, 100, 400], dtype=np.intp)


@pytest.mark.parametrize("d", DATA)
def test_fw_simplex(d):
    G = d.signed @ d.signed.T
    a = _kernels.fw_simplex(G, 0, 1e-12, 10**5, backend="cython")
    b = _kernels.fw_simplex(G, 0, 1e-12, 10**5, backend="python")
    np.testing.assert_allclose(a[0], b[0], atol=1e-12)
    assert a[2] == b[2]


@pytest.mark.parametrize("d", DATA)
@pytest.mark.parametrize("kind", [_kernels.CONSTANT, _kernels.ADAPTIVE])
def test_ascent_loop(d, kind):
    a = _kernels.ascent_loop(d.signed, 1.0, kind, 1.0, 400, REC, 1e6, backend="cython")
    b = _kernels.ascent_loop(d.signed, 1.0, kind, 1.0, 400, REC, 1e6, backend="python")
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-13)
    assert a[1:3] == b[1:3]


@pytest.mark.parametrize("d", DATA)
def test_rk4_loop(d):
    a = _kernels.rk4_loop(d.signed, 1.0, 0.05, 400, REC, 1e6, backend="cython")
    b = _kernels.rk4_loop(d.signed, 1.0, 0.05, 400, REC, 1e6, backend="python")
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("d", DATA)
def test_dual_ascent_loop(d):
    G = d.signed @ d.signed.T
    a = _kernels.dual_ascent_loop(G, 1.0, _kernels.ADAPTIVE, 1.0, 400, REC, 1e6, backend="cython")
    b = _kernels.dual_ascent_loop(G, 1.0, _kernels.ADAPTIVE, 1.0, 400, REC, 1e6, backend="python")
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-13)


def test_divergence_status_agrees():
    d = canonical("D2")
    for name in ("cython", "python"):
        _, status, fail, _ = _kernels.ascent_loop(d.signed, 1.0, 0, 1e7, 10, REC[:1], 1e6, backend=name)
        assert status == 1 and fail == 1


def test_environment_switch():
    import subprocess
    import sys
    code = "from marginlab import _kernels; print(_kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env={"MARGINLAB_PURE_PYTHON": "1"},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
