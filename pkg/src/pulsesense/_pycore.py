"""Pure-Python kernels.

Mirrors the API of the compiled ``_core`` extension one-to-one. It is used
when the extension is not built, or when ``PULSESENSE_PURE=1`` is set.
"""
import cmath
import math

import numpy as np

NAME = "python"

FAMILY_RZ = 0
FAMILY_RABI = 1
FAMILY_DK = 2

# Godfrey's Lanczos coefficients, g = 607/128, 15 terms.
LANCZOS_G = 607.0 / 128.0
LANCZOS_COEF = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _lanczos(z):
    # valid for Re z >= 0.5
    z = z - 1.0
    x = LANCZOS_COEF[0]
    for k in range(1, 15):
        x += LANCZOS_COEF[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def _sinpi(z):
    # sin(pi z) with the real part reduced first: exact zeros at the integers
    n = round(z.real)
    s = cmath.sin(math.pi * complex(z.real - n, z.imag))
    return -s if n % 2 else s


def cgamma(z):
    z = complex(z)
    if z.real < 0.5:
        return math.pi / (_sinpi(z) * _lanczos(1.0 - z))
    return _lanczos(z)


def crgamma(z):
    """1/Gamma(z); zero at the poles instead of a division by zero."""
    z = complex(z)
    if z.real < 0.5:
        return _sinpi(z) * _lanczos(1.0 - z) / math.pi
    return 1.0 / _lanczos(z)


def _rz(alpha, delta):
    nu = 0.5 + 0.5j * delta
    g = cgamma(nu)
    a = g * g * crgamma(nu - 0.5 * alpha) * crgamma(nu + 0.5 * alpha)
    b = -1j * math.sin(0.5 * math.pi * alpha) / math.cosh(0.5 * math.pi * delta)
    return a, b


def _rabi(alpha, delta):
    w = math.hypot(alpha, delta)
    s = math.sin(0.5 * w) / w
    return complex(math.cos(0.5 * w), delta * s), complex(0.0, -alpha * s)


def _dk(alpha, beta, delta):
    r = cmath.sqrt(alpha * alpha - beta * beta)
    lam = 0.5 * (r - 1j * beta)
    mu = -0.5 * (r + 1j * beta)
    nu = 0.5 * (1.0 + 1j * (delta - beta))
    g_nu = cgamma(nu)
    a = g_nu * cgamma(nu - lam - mu) * crgamma(nu - lam) * crgamma(nu - mu)
    b = (-0.5j * alpha * g_nu * cgamma(1.0 - nu + lam + mu)
         * crgamma(1.0 + lam) * crgamma(1.0 + mu))
    return a, b


def cayley_klein(family, alpha, beta, deltas):
    """Closed-form (a, b) over an array of detunings."""
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    a = np.empty(deltas.shape, dtype=np.complex128)
    b = np.empty(deltas.shape, dtype=np.complex128)
    for i, d in enumerate(deltas.flat):
        if family == FAMILY_RZ:
            a.flat[i], b.flat[i] = _rz(alpha, d)
        elif family == FAMILY_RABI:
            a.flat[i], b.flat[i] = _rabi(alpha, d)
        elif family == FAMILY_DK:
            a.flat[i], b.flat[i] = _dk(alpha, beta, d)
        else:
            raise ValueError(f"unknown family code {family}")
    return a, b


def sequence_probability(a, b, n, alternating):
    """Raw N-pulse transition probability for arrays of Cayley-Klein pairs.

    Returns NaN where the alternating sequence is degenerate (|Im a| = 1).
    """
    a = np.asarray(a, dtype=np.complex128)
    babs = np.abs(np.asarray(b, dtype=np.complex128))
    ar, ai = a.real, a.imag
    p = babs * babs
    if not alternating:
        s = np.hypot(ai, babs)
        theta = np.arctan2(s, ar)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.sin(n * theta) / s
        ratio = np.where(s < 1e-8, float(n), ratio)
        return p * ratio * ratio
    ch = np.hypot(ar, babs)
    big_theta = 2.0 * np.arctan2(np.abs(ai), ch)
    m, odd = divmod(n, 2)
    num = np.cos((m + 0.5) * big_theta) if odd else np.sin(m * big_theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p * num * num / (ch * ch)
    if n > 1:
        out = np.where(ch < 1e-12, np.nan, out)
    else:
        out = p
    return out


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _rhs_factory(rabi, detuning, phase):
    """-i H(t) U as a function of (t, u00, u01, u10, u11)."""
    if phase is None:
        def rhs(t, y):
            om = 0.5 * rabi(t)
            dl = 0.5 * detuning(t)
            u00, u01, u10, u11 = y
            return (
                -1j * (-dl * u00 + om * u10),
                -1j * (-dl * u01 + om * u11),
                -1j * (om * u00 + dl * u10),
                -1j * (om * u01 + dl * u11),
            )
    else:
        def rhs(t, y):
            om = 0.5 * rabi(t)
            e = cmath.exp(1j * phase(t))
            up = om * e.conjugate()
            lo = om * e
            u00, u01, u10, u11 = y
            return (
                -1j * up * u10,
                -1j * up * u11,
                -1j * lo * u00,
                -1j * lo * u01,
            )
    return rhs


def rk_integrate(rabi, detuning, phase, t0, t1, rtol, atol, max_steps, y0=None):
    """Adaptive DP5(4) integration of i dU/dt = H U from t0 to t1.

    ``phase`` selects the interaction frame (antiderivative of the
    detuning); ``None`` integrates the plain rotating-frame Hamiltonian.
    Returns ``(y, n_steps, status)`` with status 0 ok, 1 step budget
    exhausted, 2 step size underflow.
    """
    rhs = _rhs_factory(rabi, detuning, phase)
    y = tuple(y0) if y0 is not None else (1 + 0j, 0j, 0j, 1 + 0j)
    span = t1 - t0
    if span == 0.0:
        return y, 0, 0
    direction = 1.0 if span > 0 else -1.0
    h = direction * min(abs(span), 1e-2)
    t = t0
    k1 = rhs(t, y)
    steps = 0
    while direction * (t1 - t) > 0.0:
        if steps >= max_steps:
            return y, steps, 1
        if direction * (t + h - t1) > 0.0:
            h = t1 - t
        ks = [k1]
        for s in range(1, 7):
            row = _A[s]
            yi = tuple(
                y[c] + h * sum(row[j] * ks[j][c] for j in range(s)) for c in range(4)
            )
            ks.append(rhs(t + _C[s] * h, yi))
            if s == 6:
                y_new = yi
        err = 0.0
        for c in range(4):
            ec = h * sum(_E[j] * ks[j][c] for j in range(7))
            sc = atol + rtol * max(abs(y[c]), abs(y_new[c]))
            err += (abs(ec) / sc) ** 2
        err = math.sqrt(err / 4.0)
        steps += 1
        if err <= 1.0:
            t = t + h
            y = y_new
            k1 = ks[6]
            fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            return y, steps, 2
    return y, steps, 0


def _sech(t):
    at = abs(t)
    if at > 700.0:
        return 0.0
    e = math.exp(-at)
    return 2.0 * e / (1.0 + e * e)


def _log2cosh(t):
    at = abs(t)
    return at + math.log1p(math.exp(-2.0 * at))


def integrate_family(family, alpha, beta, delta, t0, t1, interaction, rtol, atol, max_steps):
    """Propagator of one of the built-in pulse families.

    Returns ``(u00, u01, u10, u11, n_steps, status)``.
    """
    if family == FAMILY_RZ:
        rabi = lambda t: alpha * _sech(t)
        detuning = lambda t: delta
        phase = lambda t: delta * t
    elif family == FAMILY_DK:
        rabi = lambda t: alpha * _sech(t)
        detuning = lambda t: delta + beta * math.tanh(t)
        phase = lambda t: delta * t + beta * _log2cosh(t)
    elif family == FAMILY_RABI:
        rabi = lambda t: alpha if abs(t) <= 0.5 else 0.0
        detuning = lambda t: delta
        phase = lambda t: delta * t
    else:
        raise ValueError(f"unknown family code {family}")
    y, steps, status = rk_integrate(
        rabi, detuning, phase if interaction else None, t0, t1, rtol, atol, max_steps
    )
    return y[0], y[1], y[2], y[3], steps, status
