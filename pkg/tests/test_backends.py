import os
import subprocess
import sys

import numpy as np
import pytest

from qescape import _accel
from qescape.many_body import OrbitalSet, survival_N_overlap
from qescape.propagator import k_robin
from qescape.special import erfc, wofz
from qescape.state import GaussianPacket, evolve_points

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def test_wofz_backends_agree():
    rng = np.random.default_rng(11)
    z = rng.uniform(-40, 40, 4000) + 1j * rng.uniform(-8, 40, 4000)
    a, b = wofz(z, backend="numba"), wofz(z, backend="numpy")
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-14


def test_erfc_backends_agree():
    rng = np.random.default_rng(12)
    z = rng.uniform(-25, 25, 2000) + 1j * rng.uniform(-25, 25, 2000)
    a, b = erfc(z, backend="numba"), erfc(z, backend="numpy")
    ok = np.isfinite(b) & (np.abs(b) > 1e-290)
    assert np.max(np.abs(a[ok] - b[ok]) / np.abs(b[ok])) < 1e-13


@pytest.mark.parametrize("eta", [-3.0, 0.0, 2.0, "inf"])
def test_kernel_backends_agree(eta):
    x = np.linspace(0, 2, 41)[:, None]
    xp = np.linspace(0, 2, 37)[None, :]
    a = k_robin(eta, x, xp, 0.3, backend="numba")
    b = k_robin(eta, x, xp, 0.3, backend="numpy")
    assert np.max(np.abs(a - b)) < 1e-13


def test_evolution_backends_agree():
    p = GaussianPacket(0.6, 0.1)
    xs = np.linspace(0, 1.5, 31)
    a, _ = evolve_points(p, -2.0, 0.1, xs, backend="numba")
    b, _ = evolve_points(p, -2.0, 0.1, xs, backend="numpy")
    assert np.max(np.abs(a - b)) < 1e-12
    orb = OrbitalSet([(0.3, 0.05), (0.7, 0.05)], "fermion")
    pa = survival_N_overlap(orb, 2.0, 1.0, backend="numba")
    pb = survival_N_overlap(orb, 2.0, 1.0, backend="numpy")
    assert pa == pytest.approx(pb, rel=1e-10)


def test_resolve_backend():
    assert _accel.resolve_backend("numpy") == "numpy"
    with pytest.raises(ValueError):
        _accel.resolve_backend("fortran")


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("off", "numpy"), ("1", "numba")])
def test_environment_flag(flag, expected):
    env = dict(os.environ, QESCAPE_NUMBA=flag)
    code = "from qescape._accel import resolve_backend; print(resolve_backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
