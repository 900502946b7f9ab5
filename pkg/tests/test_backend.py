import importlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pulsesense import _pycore
from pulsesense._backend import BACKEND, kernels

try:
    from pulsesense import _core
except ImportError:  # extension not built
    _core = None

needs_ext = pytest.mark.skipif(_core is None, reason="compiled extension not available")


def test_backend_name():
    assert BACKEND in ("cython", "python")
    assert kernels.NAME == BACKEND


def test_pure_env_forces_fallback():
    code = "from pulsesense import BACKEND; print(BACKEND)"
    env = dict(os.environ, PULSESENSE_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
@pytest.mark.parametrize("z", [0.5, 3.7 + 2j, -2.3 - 0.4j, -4.0, 1e-3j, 10 - 12j])
def test_gamma_parity(z):
    for f in ("cgamma", "crgamma"):
        if f == "cgamma" and z == -4.0:
            continue
        a, b = getattr(_core, f)(z), getattr(_pycore, f)(z)
        assert a == pytest.approx(b, rel=1e-14, abs=1e-300)


@needs_ext
@pytest.mark.parametrize("family,alpha,beta", [(0, 1.0, 0.0), (1, math.pi, 0.0), (2, 2.0, 2.0), (2, 1.0, 2.5)])
def test_cayley_klein_parity(family, alpha, beta):
    d = np.linspace(-5, 5, 101)
    a1, b1 = _core.cayley_klein(family, alpha, beta, d)
    a2, b2 = _pycore.cayley_klein(family, alpha, beta, d)
    assert np.max(np.abs(a1 - a2)) < 1e-14 and np.max(np.abs(b1 - b2)) < 1e-14


@needs_ext
@pytest.mark.parametrize("n", [1, 2, 3, 8, 9, 16, 63])
@pytest.mark.parametrize("alt", [False, True])
def test_sequence_probability_parity(n, alt):
    rng = np.random.default_rng(n)
    v = rng.normal(size=(200, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    a, b = v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]
    p1 = _core.sequence_probability(a, b, n, alt)
    p2 = _pycore.sequence_probability(a, b, n, alt)
    assert np.max(np.abs(p1 - p2)) < 1e-12


@needs_ext
@pytest.mark.parametrize("family,alpha,beta,delta,interaction,t0,t1", [
    (0, 1.0, 0.0, 0.4, True, -30.0, 30.0),
    (1, math.pi, 0.0, 1.2, False, -0.5, 0.5),
    (2, 2.0, 2.0, -0.3, True, -30.0, 30.0),
])
def test_integrator_parity(family, alpha, beta, delta, interaction, t0, t1):
    r1 = _core.integrate_family(family, alpha, beta, delta, t0, t1, interaction, 1e-12, 1e-12, 200000)
    r2 = _pycore.integrate_family(family, alpha, beta, delta, t0, t1, interaction, 1e-12, 1e-12, 200000)
    assert r1[5] == r2[5] == 0
    assert np.max(np.abs(np.array(r1[:4]) - np.array(r2[:4]))) < 1e-10
