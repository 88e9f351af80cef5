"""Complex error functions.

The Faddeeva function ``w(z) = exp(-z**2) erfc(-iz)`` is the single primitive;
``erfcx`` and ``erfc`` are derived from it.  The evaluation follows the
Gautschi / Poppe-Wijers scheme: a Taylor series inside a small ellipse around
the origin, a Laplace continued fraction far away, and Gautschi's combined
continued-fraction/Taylor summation in between.  The lower half-plane is
reached through ``w(z) = 2 exp(-z**2) - w(-z)``.

Two implementations of the identical algorithm exist: a scalar kernel compiled
with numba (``_wofz_scalar``), and a masked, vectorized numpy version used
when numba is disabled.
"""
import math

import numpy as np

from ._accel import njit, resolve_backend
from .errors import DomainError

__all__ = ["wofz", "erfcx", "erfc"]

_TWO_OVER_SQRT_PI = 1.12837916709551257388


@njit
def _wofz_scalar(z):
    xi = z.real
    yi = z.imag
    xabs = abs(xi)
    yabs = abs(yi)
    x = xabs / 6.3
    y = yabs / 4.4
    qrho = x * x + y * y
    xquad = xabs * xabs - yabs * yabs
    yquad = 2.0 * xabs * yabs
    u2 = 0.0
    v2 = 0.0
    small = qrho < 0.085264
    if small:
        qrho = (1.0 - 0.85 * y) * math.sqrt(qrho)
        n = int(round(6.0 + 72.0 * qrho))
        j = 2 * n + 1
        xsum = 1.0 / j
        ysum = 0.0
        for i in range(n, 0, -1):
            j -= 2
            xaux = (xsum * xquad - ysum * yquad) / i
            ysum = (xsum * yquad + ysum * xquad) / i
            xsum = xaux + 1.0 / j
        u1 = -_TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0
        v1 = _TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs)
        daux = math.exp(-xquad)
        u2 = daux * math.cos(yquad)
        v2 = -daux * math.sin(yquad)
        u = u1 * u2 - v1 * v2
        v = u1 * v2 + v1 * u2
    else:
        if qrho > 1.0:
            h = 0.0
            h2 = 0.0
            kapn = 0
            qrho = math.sqrt(qrho)
            nu = int(3.0 + 1442.0 / (26.0 * qrho + 77.0))
        else:
            qrho = (1.0 - y) * math.sqrt(1.0 - qrho)
            h = 1.88 * qrho
            h2 = 2.0 * h
            kapn = int(round(7.0 + 34.0 * qrho))
            nu = int(round(16.0 + 26.0 * qrho))
        use_sum = h > 0.0
        qlambda = h2**kapn if use_sum else 0.0
        rx = 0.0
        ry = 0.0
        sx = 0.0
        sy = 0.0
        for n in range(nu, -1, -1):
            np1 = n + 1
            tx = yabs + h + np1 * rx
            ty = xabs - np1 * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = c * tx
            ry = c * ty
            if use_sum and n <= kapn:
                tx = qlambda + sx
                sx = rx * tx - ry * sy
                sy = ry * tx + rx * sy
                qlambda = qlambda / h2
        if use_sum:
            u = _TWO_OVER_SQRT_PI * sx
            v = _TWO_OVER_SQRT_PI * sy
        else:
            u = _TWO_OVER_SQRT_PI * rx
            v = _TWO_OVER_SQRT_PI * ry
        if yabs == 0.0:
            u = math.exp(-xabs * xabs)
    if yi < 0.0:
        if small:
            u2 = 2.0 * u2
            v2 = 2.0 * v2
        else:
            w1 = 2.0 * math.exp(-xquad)
            u2 = w1 * math.cos(yquad)
            v2 = -w1 * math.sin(yquad)
        u = u2 - u
        v = v2 - v
        if xi > 0.0:
            v = -v
    elif xi < 0.0:
        v = -v
    return complex(u, v)


@njit
def _erfcx_scalar(z):
    return _wofz_scalar(complex(-z.imag, z.real))


@njit
def _erfc_scalar(z):
    if z.real < 0.0:
        return 2.0 - _erfc_scalar(-z)
    # exp(-z^2) split so the modulus and phase are formed separately
    x = z.real
    y = z.imag
    w = _wofz_scalar(complex(-y, x))
    expo = (y - x) * (y + x)
    ph = -2.0 * x * y
    if expo > 700.0:
        # fold |w| into the exponent so inf*0 never forms
        expo += math.log(abs(w))
        ph += math.atan2(w.imag, w.real)
        mod = math.exp(expo)
        return complex(mod * math.cos(ph), mod * math.sin(ph))
    mod = math.exp(expo)
    return complex(mod * math.cos(ph), mod * math.sin(ph)) * w


@njit
def _wofz_loop(z):
    out = np.empty_like(z)
    for i in range(z.size):
        out[i] = _wofz_scalar(z[i])
    return out


@njit
def _erfc_loop(z):
    out = np.empty_like(z)
    for i in range(z.size):
        out[i] = _erfc_scalar(z[i])
    return out


def _wofz_numpy(z):
    z = np.asarray(z, dtype=np.complex128)
    xi = z.real
    yi = z.imag
    xabs = np.abs(xi)
    yabs = np.abs(yi)
    x = xabs / 6.3
    y = yabs / 4.4
    qrho = x * x + y * y
    xquad = xabs * xabs - yabs * yabs
    yquad = 2.0 * xabs * yabs
    small = qrho < 0.085264
    far = (~small) & (qrho > 1.0)
    mid = (~small) & (~far)
    u = np.zeros_like(xabs)
    v = np.zeros_like(xabs)

    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        daux = np.exp(-xquad)
        u2 = daux * np.cos(yquad)
        v2 = -daux * np.sin(yquad)

    if small.any():
        xq, yq = xquad[small], yquad[small]
        xa, ya = xabs[small], yabs[small]
        rho = (1.0 - 0.85 * y[small]) * np.sqrt(qrho[small])
        nmax = int(np.max(np.rint(6.0 + 72.0 * rho)))
        j = 2 * nmax + 1
        xsum = np.full(xq.shape, 1.0 / j)
        ysum = np.zeros(xq.shape)
        for i in range(nmax, 0, -1):
            j -= 2
            xaux = (xsum * xq - ysum * yq) / i
            ysum = (xsum * yq + ysum * xq) / i
            xsum = xaux + 1.0 / j
        u1 = -_TWO_OVER_SQRT_PI * (xsum * ya + ysum * xa) + 1.0
        v1 = _TWO_OVER_SQRT_PI * (xsum * xa - ysum * ya)
        u[small] = u1 * u2[small] - v1 * v2[small]
        v[small] = u1 * v2[small] + v1 * u2[small]

    cf = ~small
    if cf.any():
        xa, ya = xabs[cf], yabs[cf]
        m = mid[cf]
        rho = np.where(m, (1.0 - y[cf]) * np.sqrt(np.clip(1.0 - qrho[cf], 0.0, None)), np.sqrt(qrho[cf]))
        h = np.where(m, 1.88 * rho, 0.0)
        h2 = 2.0 * h
        kapn = np.where(m, np.rint(7.0 + 34.0 * rho), 0.0).astype(np.int64)
        nu = np.where(m, np.rint(16.0 + 26.0 * rho), np.floor(3.0 + 1442.0 / (26.0 * rho + 77.0)))
        numax = int(nu.max())
        with np.errstate(divide="ignore", invalid="ignore"):
            qlambda = np.where(m, h2 ** kapn, 0.0)
        rx = np.zeros(xa.shape)
        ry = np.zeros(xa.shape)
        sx = np.zeros(xa.shape)
        sy = np.zeros(xa.shape)
        for n in range(numax, -1, -1):
            np1 = n + 1
            tx = ya + h + np1 * rx
            ty = xa - np1 * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = c * tx
            ry = c * ty
            upd = m & (n <= kapn)
            if upd.any():
                tx = qlambda + sx
                sx_new = rx * tx - ry * sy
                sy_new = ry * tx + rx * sy
                sx = np.where(upd, sx_new, sx)
                sy = np.where(upd, sy_new, sy)
                qlambda = np.where(upd, qlambda / np.where(h2 > 0, h2, 1.0), qlambda)
        uc = _TWO_OVER_SQRT_PI * np.where(m, sx, rx)
        vc = _TWO_OVER_SQRT_PI * np.where(m, sy, ry)
        uc = np.where(ya == 0.0, np.exp(-xa * xa), uc)
        u[cf] = uc
        v[cf] = vc

    lower = yi < 0.0
    if lower.any():
        ul = u[lower]
        vl = v[lower]
        sm = small[lower]
        with np.errstate(over="ignore", invalid="ignore"):
            w1 = 2.0 * np.exp(-xquad[lower])
            ur = np.where(sm, 2.0 * u2[lower], w1 * np.cos(yquad[lower]))
            vr = np.where(sm, 2.0 * v2[lower], -w1 * np.sin(yquad[lower]))
        ul = ur - ul
        vl = vr - vl
        vl = np.where(xi[lower] > 0.0, -vl, vl)
        u[lower] = ul
        v[lower] = vl
    upper = ~lower
    v[upper] = np.where(xi[upper] < 0.0, -v[upper], v[upper])
    return u + 1j * v


def _erfc_numpy(z):
    z = np.asarray(z, dtype=np.complex128)
    neg = z.real < 0.0
    za = np.where(neg, -z, z)
    x, y = za.real, za.imag
    w = _wofz_numpy(-y + 1j * x)
    expo = (y - x) * (y + x)
    ph = -2.0 * x * y
    big = expo > 700.0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        expo = np.where(big, expo + np.log(np.abs(w)), expo)
        ph = np.where(big, ph + np.angle(w), ph)
        mod = np.exp(expo)
    factor = np.where(big, 1.0, w)
    with np.errstate(invalid="ignore", over="ignore"):
        val = mod * (np.cos(ph) + 1j * np.sin(ph)) * factor
    return np.where(neg, 2.0 - val, val)


def _prepare(z):
    arr = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise DomainError("complex error function needs finite arguments")
    return arr


def _finish(arr, out):
    if not np.all(np.isfinite(out)):
        raise OverflowError("complex error function result is not representable in double precision")
    if arr.ndim == 0:
        return complex(out.reshape(()))
    return out.reshape(arr.shape)


def wofz(z, backend=None):
    """Faddeeva function ``w(z) = exp(-z^2) erfc(-iz)``."""
    arr = _prepare(z)
    if resolve_backend(backend) == "numba":
        out = _wofz_loop(arr.ravel())
    else:
        out = _wofz_numpy(arr.ravel())
    return _finish(arr, out)


def erfcx(z, backend=None):
    """Scaled complementary error function ``exp(z^2) erfc(z)``.

    Stays finite wherever the true value is representable, including
    ``|Im z|`` far beyond the point where ``exp(z^2)`` alone would overflow.
    """
    arr = _prepare(z)
    return wofz(1j * arr, backend=backend)


def erfc(z, backend=None):
    """Complementary error function of complex argument."""
    arr = _prepare(z)
    if resolve_backend(backend) == "numba":
        out = _erfc_loop(arr.ravel())
    else:
        out = _erfc_numpy(arr.ravel())
    return _finish(arr, out)
