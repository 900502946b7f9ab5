# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API as ``_pycore``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport (sin, cos, sinh, cosh, tanh, exp, log, log1p, sqrt, pow,
                        fabs, floor, atan2, hypot, M_PI, NAN)

cnp.import_array()

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double complex csin(double complex)
    double complex csqrt(double complex)
    double creal(double complex)
    double cimag(double complex)
    double cabs(double complex)
    double complex conj(double complex)

NAME = "cython"

FAMILY_RZ = 0
FAMILY_RABI = 1
FAMILY_DK = 2

cdef double LANCZOS_G = 607.0 / 128.0
cdef double[15] LANCZOS_COEF = [
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
]
cdef double SQRT_2PI = 2.5066282746310002
cdef double complex I = 1j


cdef inline double complex _lanczos(double complex z) noexcept nogil:
    cdef int k
    cdef double complex x, t
    z = z - 1.0
    x = LANCZOS_COEF[0]
    for k in range(1, 15):
        x = x + LANCZOS_COEF[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return SQRT_2PI * cexp((z + 0.5) * clog(t) - t) * x


cdef inline double complex _sinpi(double complex z) noexcept nogil:
    # sin(pi z) with the real part reduced first: exact zeros at the integers
    cdef double n = floor(creal(z) + 0.5)
    cdef double complex s = csin(M_PI * ((creal(z) - n) + cimag(z) * I))
    if (<long long>n) & 1:
        return -s
    return s


cdef inline double complex _cgamma(double complex z) noexcept nogil:
    if creal(z) < 0.5:
        return M_PI / (_sinpi(z) * _lanczos(1.0 - z))
    return _lanczos(z)


cdef inline double complex _crgamma(double complex z) noexcept nogil:
    if creal(z) < 0.5:
        return _sinpi(z) * _lanczos(1.0 - z) / M_PI
    return 1.0 / _lanczos(z)


def cgamma(z):
    return complex(_cgamma(<double complex>complex(z)))


def crgamma(z):
    return complex(_crgamma(<double complex>complex(z)))


cdef inline void _rz(double alpha, double delta, double complex* a, double complex* b) noexcept nogil:
    cdef double complex nu = 0.5 + 0.5 * I * delta
    cdef double complex g = _cgamma(nu)
    a[0] = g * g * _crgamma(nu - 0.5 * alpha) * _crgamma(nu + 0.5 * alpha)
    b[0] = -I * sin(0.5 * M_PI * alpha) / cosh(0.5 * M_PI * delta)


cdef inline void _rabi(double alpha, double delta, double complex* a, double complex* b) noexcept nogil:
    cdef double w = hypot(alpha, delta)
    cdef double s = sin(0.5 * w) / w
    a[0] = cos(0.5 * w) + I * delta * s
    b[0] = -I * alpha * s


cdef inline void _dk(double alpha, double beta, double delta,
                     double complex* a, double complex* b) noexcept nogil:
    cdef double complex r = csqrt(<double complex>(alpha * alpha - beta * beta))
    cdef double complex lam = 0.5 * (r - I * beta)
    cdef double complex mu = -0.5 * (r + I * beta)
    cdef double complex nu = 0.5 * (1.0 + I * (delta - beta))
    cdef double complex g_nu = _cgamma(nu)
    a[0] = g_nu * _cgamma(nu - lam - mu) * _crgamma(nu - lam) * _crgamma(nu - mu)
    b[0] = (-0.5 * I * alpha * g_nu * _cgamma(1.0 - nu + lam + mu)
            * _crgamma(1.0 + lam) * _crgamma(1.0 + mu))


def cayley_klein(int family, double alpha, double beta, deltas):
    cdef cnp.ndarray[double, ndim=1] d = np.ascontiguousarray(deltas, dtype=np.float64).ravel()
    cdef Py_ssize_t n = d.shape[0], i
    cdef cnp.ndarray[double complex, ndim=1] a = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=1] b = np.empty(n, dtype=np.complex128)
    if family not in (FAMILY_RZ, FAMILY_RABI, FAMILY_DK):
        raise ValueError(f"unknown family code {family}")
    with nogil:
        for i in range(n):
            if family == 0:
                _rz(alpha, d[i], &a[i], &b[i])
            elif family == 1:
                _rabi(alpha, d[i], &a[i], &b[i])
            else:
                _dk(alpha, beta, d[i], &a[i], &b[i])
    shape = np.shape(deltas)
    return a.reshape(shape), b.reshape(shape)


def sequence_probability(a, b, long n, bint alternating):
    cdef cnp.ndarray[double complex, ndim=1] av = np.ascontiguousarray(a, dtype=np.complex128).ravel()
    cdef cnp.ndarray[double complex, ndim=1] bv = np.ascontiguousarray(b, dtype=np.complex128).ravel()
    cdef Py_ssize_t size = av.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(size, dtype=np.float64)
    cdef double ar, ai, babs, p, s, th, ratio, ch, big, num
    cdef long m = n // 2
    cdef bint odd = n % 2
    with nogil:
        for i in range(size):
            ar = creal(av[i])
            ai = cimag(av[i])
            babs = cabs(bv[i])
            p = babs * babs
            if not alternating:
                s = hypot(ai, babs)
                if s < 1e-8:
                    ratio = n
                else:
                    th = atan2(s, ar)
                    ratio = sin(n * th) / s
                out[i] = p * ratio * ratio
            elif n == 1:
                out[i] = p
            else:
                ch = hypot(ar, babs)
                if ch < 1e-12:
                    out[i] = NAN
                    continue
                big = 2.0 * atan2(fabs(ai), ch)
                if odd:
                    num = cos((m + 0.5) * big)
                else:
                    num = sin(m * big)
                out[i] = p * num * num / (ch * ch)
    return out.reshape(np.shape(a))


# Dormand-Prince 5(4) tableau
cdef double[7] C_ = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
cdef double[7][7] A_ = [
    [0, 0, 0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0, 0],
    [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0],
]
cdef double[7] E_ = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                     -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef inline double _sech(double t) noexcept nogil:
    cdef double at = fabs(t), e
    if at > 700.0:
        return 0.0
    e = exp(-at)
    return 2.0 * e / (1.0 + e * e)


cdef struct Pulse:
    int family
    double alpha
    double beta
    double delta
    bint interaction


cdef inline void _rhs(Pulse* P, double t, double complex* y, double complex* out) noexcept nogil:
    cdef double om, dl, ph, at
    cdef double complex e, up, lo
    if P.family == 1:
        om = 0.5 * P.alpha if fabs(t) <= 0.5 else 0.0
    else:
        om = 0.5 * P.alpha * _sech(t)
    if P.interaction:
        ph = P.delta * t
        if P.family == 2:
            at = fabs(t)
            ph = ph + P.beta * (at + log1p(exp(-2.0 * at)))
        e = cos(ph) + I * sin(ph)
        up = om * conj(e)
        lo = om * e
        out[0] = -I * up * y[2]
        out[1] = -I * up * y[3]
        out[2] = -I * lo * y[0]
        out[3] = -I * lo * y[1]
    else:
        dl = P.delta
        if P.family == 2:
            dl = dl + P.beta * tanh(t)
        dl = 0.5 * dl
        out[0] = -I * (-dl * y[0] + om * y[2])
        out[1] = -I * (-dl * y[1] + om * y[3])
        out[2] = -I * (om * y[0] + dl * y[2])
        out[3] = -I * (om * y[1] + dl * y[3])


def integrate_family(int family, double alpha, double beta, double delta,
                     double t0, double t1, bint interaction,
                     double rtol, double atol, long max_steps):
    cdef Pulse P
    cdef double complex y[4]
    cdef double complex ynew[4]
    cdef double complex yi[4]
    cdef double complex k[7][4]
    cdef double complex acc, ec
    cdef double t, h, span, direction, err, sc, fac
    cdef long steps = 0
    cdef int status = 0, s, j, c
    if family not in (FAMILY_RZ, FAMILY_RABI, FAMILY_DK):
        raise ValueError(f"unknown family code {family}")
    P.family = family
    P.alpha = alpha
    P.beta = beta
    P.delta = delta
    P.interaction = interaction
    y[0] = 1.0
    y[1] = 0.0
    y[2] = 0.0
    y[3] = 1.0
    span = t1 - t0
    if span == 0.0:
        return y[0], y[1], y[2], y[3], 0, 0
    direction = 1.0 if span > 0 else -1.0
    h = direction * min(fabs(span), 1e-2)
    t = t0
    with nogil:
        _rhs(&P, t, y, k[0])
        while direction * (t1 - t) > 0.0:
            if steps >= max_steps:
                status = 1
                break
            if direction * (t + h - t1) > 0.0:
                h = t1 - t
            for s in range(1, 7):
                for c in range(4):
                    acc = 0.0
                    for j in range(s):
                        acc = acc + A_[s][j] * k[j][c]
                    yi[c] = y[c] + h * acc
                _rhs(&P, t + C_[s] * h, yi, k[s])
            for c in range(4):
                ynew[c] = yi[c]
            err = 0.0
            for c in range(4):
                ec = 0.0
                for j in range(7):
                    ec = ec + E_[j] * k[j][c]
                ec = h * ec
                sc = atol + rtol * max(cabs(y[c]), cabs(ynew[c]))
                err = err + (cabs(ec) / sc) * (cabs(ec) / sc)
            err = sqrt(err / 4.0)
            steps += 1
            if err <= 1.0:
                t = t + h
                for c in range(4):
                    y[c] = ynew[c]
                    k[0][c] = k[6][c]
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = min(10.0, 0.9 * pow(err, -0.2))
            else:
                fac = max(0.2, 0.9 * pow(err, -0.2))
            h = h * fac
            if fabs(h) < 1e-14 * max(1.0, fabs(t)):
                status = 2
                break
    return y[0], y[1], y[2], y[3], steps, status
