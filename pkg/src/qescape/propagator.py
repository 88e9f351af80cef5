"""Single-particle propagators on the half-line x >= 0 (hbar = m = 1).

All kernels are closed-form and analytic in the positions, so negative
arguments are accepted as the natural continuation (the image construction
relies on this).  Time must be strictly positive; sqrt(2*pi*i*t) is taken on
the principal branch, i.e. with phase exp(i*pi/4).

The Robin kernel is never formed as ``erfc * exp``: with
``z = (x + x' + i*eta*t) / sqrt(2it)`` one has
``eta*(x+x') + i*t*eta**2/2 = z**2 - (x+x')**2/(2it)``, so the correction is
``eta * exp(i*(x+x')**2/(2t)) * erfcx(z)``, which stays bounded for any sign
of eta and any t.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, resolve_backend
from .errors import DomainError
from .special import _wofz_numpy, _wofz_scalar

__all__ = [
    "RobinParameter",
    "as_robin",
    "k_free",
    "k_neumann",
    "k_dirichlet",
    "k_robin",
    "k_robin_large_t",
    "k_robin_small_eta",
    "k_robin_large_eta",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_EIPI4_CONJ = complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))

KIND_ROBIN = 0
KIND_DIRICHLET = 1


@dataclass(frozen=True)
class RobinParameter:
    """Boundary parameter in ``(d/dx - eta) psi(0) = 0``.

    ``value`` is a finite float, or ``+inf``/``-inf`` for the Dirichlet
    limit.  The limit is dispatched as its own case and never fed into an
    exponential.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise DomainError("eta must not be NaN")
        object.__setattr__(self, "value", v)

    @classmethod
    def dirichlet(cls, sign=1):
        return cls(math.copysign(math.inf, sign))

    @property
    def is_dirichlet(self):
        return math.isinf(self.value)

    @property
    def eta(self):
        """The finite value of eta; raises for the Dirichlet limit."""
        if self.is_dirichlet:
            raise DomainError("Dirichlet limit has no finite eta")
        return self.value

    @property
    def kind(self):
        return KIND_DIRICHLET if self.is_dirichlet else KIND_ROBIN

    @property
    def regime(self):
        """One of 'negative', 'neumann', 'positive', 'dirichlet'."""
        if self.is_dirichlet:
            return "dirichlet"
        if self.value < 0:
            return "negative"
        if self.value == 0:
            return "neumann"
        return "positive"

    @property
    def label(self):
        if self.is_dirichlet:
            return "inf" if self.value > 0 else "-inf"
        return repr(self.value)

    def __str__(self):
        return self.label


def as_robin(eta):
    """Coerce a float, a string such as ``"inf"``/``"-2"`` or a
    ``RobinParameter`` into a ``RobinParameter``."""
    if isinstance(eta, RobinParameter):
        return eta
    if isinstance(eta, str):
        s = eta.strip().lower()
        if s in ("inf", "+inf", "infinity", "dirichlet"):
            return RobinParameter.dirichlet(1)
        if s in ("-inf", "-infinity"):
            return RobinParameter.dirichlet(-1)
        if s == "neumann":
            return RobinParameter(0.0)
        return RobinParameter(float(s))
    return RobinParameter(float(eta))


# ---------------------------------------------------------------------------
# scalar kernels (numba)


@njit
def _kfree_scalar(d, t):
    ph = d * d / (2.0 * t)
    return _EIPI4_CONJ * complex(math.cos(ph), math.sin(ph)) / math.sqrt(2.0 * math.pi * t)


@njit
def _robin_correction_scalar(xp, t, eta):
    # eta * exp(i xp^2/(2t)) * erfcx(z), xp = x + x'
    st = 2.0 * math.sqrt(t)
    # i*z in closed form; erfcx(z) = w(i z)
    iz = complex((xp - eta * t) / st, (xp + eta * t) / st)
    ph = xp * xp / (2.0 * t)
    return eta * complex(math.cos(ph), math.sin(ph)) * _wofz_scalar(iz)


@njit
def _kernel_scalar(x, xp, t, eta, kind):
    direct = _kfree_scalar(x - xp, t)
    image = _kfree_scalar(x + xp, t)
    if kind == KIND_DIRICHLET:
        return direct - image
    if eta == 0.0:
        return direct + image
    return direct + image - _robin_correction_scalar(x + xp, t, eta)


@njit
def _kernel_flat(x, xp, t, eta, kind):
    out = np.empty(x.size, dtype=np.complex128)
    for i in range(x.size):
        out[i] = _kernel_scalar(x[i], xp[i], t, eta, kind)
    return out


@njit
def _apply_kernel_numba(xs, src, wpsi, t, eta, kind):
    """out[i] = sum_j K(xs[i], src[j], t) * wpsi[j]."""
    out = np.empty(xs.size, dtype=np.complex128)
    for i in range(xs.size):
        acc = 0j
        for j in range(src.size):
            acc += _kernel_scalar(xs[i], src[j], t, eta, kind) * wpsi[j]
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# numpy kernels


def _kfree_numpy(d, t):
    ph = d * d / (2.0 * t)
    return _EIPI4_CONJ * np.exp(1j * ph) / math.sqrt(2.0 * math.pi * t)


def _kernel_numpy(x, xp, t, eta, kind):
    direct = _kfree_numpy(x - xp, t)
    image = _kfree_numpy(x + xp, t)
    if kind == KIND_DIRICHLET:
        return direct - image
    if eta == 0.0:
        return direct + image
    s = x + xp
    st = 2.0 * math.sqrt(t)
    iz = (s - eta * t) / st + 1j * (s + eta * t) / st
    corr = eta * np.exp(1j * s * s / (2.0 * t)) * _wofz_numpy(iz.ravel()).reshape(iz.shape)
    return direct + image - corr


def _apply_kernel_numpy(xs, src, wpsi, t, eta, kind, chunk=2_000_000):
    out = np.empty(xs.size, dtype=np.complex128)
    rows = max(1, chunk // max(src.size, 1))
    for i0 in range(0, xs.size, rows):
        blk = xs[i0:i0 + rows, None]
        out[i0:i0 + rows] = _kernel_numpy(blk, src[None, :], t, eta, kind) @ wpsi
    return out


def apply_kernel(xs, src, wpsi, t, eta, backend=None):
    """Quadrature sum ``sum_j K_eta(xs[i], src[j], t) * wpsi[j]``.

    ``wpsi`` carries the quadrature weights already multiplied in.
    """
    eta = as_robin(eta)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    src = np.ascontiguousarray(src, dtype=np.float64)
    wpsi = np.ascontiguousarray(wpsi, dtype=np.complex128)
    val = 0.0 if eta.is_dirichlet else eta.value
    if resolve_backend(backend) == "numba":
        return _apply_kernel_numba(xs, src, wpsi, float(t), val, eta.kind)
    return _apply_kernel_numpy(xs, src, wpsi, float(t), val, eta.kind)


# ---------------------------------------------------------------------------
# public surface


def _check_time(t):
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"propagator needs finite t > 0, got {t}")
    return t


def _positions(x, xp):
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xp))):
        raise DomainError("positions must be finite")
    return np.broadcast_arrays(x, xp)


def _evaluate(x, xp, t, eta, backend):
    t = _check_time(t)
    eta = as_robin(eta)
    bx, bxp = _positions(x, xp)
    shape = bx.shape
    val = 0.0 if eta.is_dirichlet else eta.value
    if resolve_backend(backend) == "numba":
        out = _kernel_flat(np.ascontiguousarray(bx).ravel(), np.ascontiguousarray(bxp).ravel(), t, val, eta.kind)
    else:
        out = _kernel_numpy(bx.ravel(), bxp.ravel(), t, val, eta.kind)
    return complex(out[0]) if shape == () else out.reshape(shape)


def k_free(x, x_prime, t):
    """Free-particle propagator ``(2 pi i t)^(-1/2) exp(i (x-x')^2 / (2t))``."""
    t = _check_time(t)
    bx, bxp = _positions(x, x_prime)
    out = _kfree_numpy(bx - bxp, t)
    return complex(out) if out.ndim == 0 else out


def k_neumann(x, x_prime, t):
    """Neumann kernel by images: ``K_free(x, x') + K_free(x, -x')``."""
    return _as_output(k_free(x, x_prime, t) + k_free(x, -np.asarray(x_prime, dtype=float), t))


def k_dirichlet(x, x_prime, t):
    """Dirichlet kernel by images: ``K_free(x, x') - K_free(x, -x')``."""
    return _as_output(k_free(x, x_prime, t) - k_free(x, -np.asarray(x_prime, dtype=float), t))


def _as_output(v):
    return complex(v) if np.ndim(v) == 0 else v


def k_robin(eta, x, x_prime, t, backend=None):
    """Exact Robin propagator ``K_eta(x, x', t)``.

    For finite eta this is ``K_0 - eta * erfc(z) * exp(eta (x+x') + i t eta^2/2)``
    evaluated through ``erfcx``; the Dirichlet limit returns ``k_dirichlet``.
    """
    return _evaluate(x, x_prime, t, eta, backend)


def k_robin_large_t(eta, x, x_prime, t):
    """Leading large-t behaviour of the Robin kernel.

    ``(|eta| - eta) exp(eta (x+x') + i t eta^2/2)
    - (1+i)(1 + x eta)(1 + x' eta) / (sqrt(pi) eta^2 t^{3/2})``.
    The expansion does not exist at eta = 0 (the limits do not commute).
    """
    t = _check_time(t)
    eta = as_robin(eta)
    if eta.is_dirichlet or eta.value == 0.0:
        raise DomainError("large-t expansion needs finite nonzero eta")
    e = eta.value
    bx, bxp = _positions(x, x_prime)
    s = bx + bxp
    bound = (abs(e) - e) * np.exp(e * s + 0.5j * t * e * e) if e < 0 else 0.0
    tail = (1 + 1j) * (1 + bx * e) * (1 + bxp * e) / (math.sqrt(math.pi) * e * e * t**1.5)
    return _as_output(bound - tail)


def k_robin_small_eta(eta, x, x_prime, t, order=1):
    """Expansion about the Neumann kernel, ``K_0 - eta erfc(e^{-i pi/4} (x+x')/sqrt(2t))``."""
    t = _check_time(t)
    e = as_robin(eta).eta
    base = np.asarray(k_neumann(x, x_prime, t))
    if order == 0:
        return _as_output(base)
    if order != 1:
        raise ValueError("order must be 0 or 1")
    from .special import erfc

    bx, bxp = _positions(x, x_prime)
    arg = _EIPI4_CONJ * (bx + bxp) / math.sqrt(2.0 * t)
    return _as_output(base - e * np.asarray(erfc(arg)))


def k_robin_large_eta(eta, x, x_prime, t, order=1):
    """Expansion about the Dirichlet kernel for |eta| -> infinity.

    ``K_inf - 2i (x+x')/(eta t) K_free(x, -x')``; for eta < 0 the bound-state
    term ``2|eta| exp(-|eta|(x+x') + i t eta^2/2)`` is added.
    """
    t = _check_time(t)
    e = as_robin(eta).eta
    if e == 0.0:
        raise DomainError("large-eta expansion needs eta != 0")
    bx, bxp = _positions(x, x_prime)
    out = np.asarray(k_dirichlet(bx, bxp, t), dtype=complex)
    if order >= 1:
        out = out - 2j * (bx + bxp) / (e * t) * np.asarray(k_free(bx, -bxp, t))
    elif order != 0:
        raise ValueError("order must be 0 or 1")
    if e < 0:
        out = out + 2.0 * abs(e) * np.exp(-abs(e) * (bx + bxp) + 0.5j * t * e * e)
    return _as_output(out)
