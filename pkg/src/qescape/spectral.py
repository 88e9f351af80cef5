"""Eigenfunction-expansion construction of the Robin propagator.

Slow but independent of the closed form: nothing here touches an error
function.  The k-integral

    K(x, x', t) = int_0^inf phi_k(x) phi_k(x') exp(-i k^2 t / 2) dk  (+ bound state)

is only conditionally convergent on the real axis.  The integrand is
meromorphic in k with poles at k = +-i|eta| only, so the ray is rotated to
k = s exp(-i theta), 0 < theta <= pi/4, where exp(-i k^2 t/2) decays like a
Gaussian in s.  theta is kept small enough that the exponential growth of the
trigonometric factors, exp(s sin(theta) (x+x')), never amplifies the
integrand by more than ~exp(1.5) over the final value.
"""
import math

import numpy as np

from .errors import DomainError, QuadratureError
from .propagator import as_robin

__all__ = ["phi", "chi", "bound_energy", "k_spectral", "spectral_product"]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def phi(k, eta, x):
    """Continuum eigenfunction with energy k^2/2.

    ``sqrt(2 / (pi (1 + k^2/eta^2))) * (sin(kx) + (k/eta) cos(kx))``, with the
    cosine (eta = 0) and sine (Dirichlet) limits handled explicitly.  Accepts
    complex k for contour work.
    """
    eta = as_robin(eta)
    k = np.asarray(k)
    if np.any(np.isreal(k) & (np.real(k) <= 0)):
        raise DomainError("phi needs k > 0")
    x = np.asarray(x, dtype=float)
    if eta.is_dirichlet:
        out = _SQRT_2_OVER_PI * np.sin(k * x)
    elif eta.value == 0.0:
        out = _SQRT_2_OVER_PI * np.cos(k * x)
    else:
        e = eta.value
        out = _SQRT_2_OVER_PI * (e * np.sin(k * x) + k * np.cos(k * x)) / np.sqrt(e * e + k * k) * np.sign(e)
    return out[()] if out.ndim == 0 else out


def spectral_product(k, eta, x, xp):
    """``phi_k(x) phi_k(x')`` written without the square root, so it stays
    analytic (meromorphic) in complex k."""
    eta = as_robin(eta)
    if eta.is_dirichlet:
        return (2.0 / math.pi) * np.sin(k * x) * np.sin(k * xp)
    e = eta.value
    if e == 0.0:
        return (2.0 / math.pi) * np.cos(k * x) * np.cos(k * xp)
    a = e * np.sin(k * x) + k * np.cos(k * x)
    b = e * np.sin(k * xp) + k * np.cos(k * xp)
    return (2.0 / math.pi) * a * b / (e * e + k * k)


def chi(eta, x):
    """Bound state ``sqrt(2|eta|) exp(-|eta| x)``, eta < 0 only."""
    e = float(as_robin(eta).value)
    if not e < 0 or math.isinf(e):
        raise DomainError("bound state exists only for finite eta < 0")
    x = np.asarray(x, dtype=float)
    out = math.sqrt(2.0 * abs(e)) * np.exp(-abs(e) * x)
    return out[()] if out.ndim == 0 else out


def bound_energy(eta):
    e = as_robin(eta).eta
    if e >= 0:
        raise DomainError("bound state exists only for eta < 0")
    return -0.5 * e * e


def _contour(x, xp, t):
    s = abs(x) + abs(xp)
    tan_theta = 1.0 if s == 0 else min(1.0, 6.0 * t / (s * s))
    theta = math.atan(tan_theta)
    # |integrand| <= exp(b s - a s^2) up to polynomial factors
    a = 0.5 * t * math.sin(2.0 * theta)
    b = math.sin(theta) * s
    return theta, a, b


def _rotated_integral(eta, x, xp, t, theta, s_max, n_panels, order=24):
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, s_max, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    s = (mids[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    rot = complex(math.cos(theta), -math.sin(theta))
    k = s * rot
    f = spectral_product(k, eta, x, xp) * np.exp(-0.5j * k * k * t)
    return rot * np.dot(w, f)


def k_spectral(eta, x, x_prime, t, k_max=None, n_nodes=None, include_bound_state=True, tol=1e-8):
    """Propagator from the eigenbasis, by quadrature along a rotated ray.

    ``k_max`` is the contour length in |k| (default: where the integrand has
    decayed below 1e-22 of its scale); ``n_nodes`` the starting node count,
    which is doubled twice.  Raises ``QuadratureError`` when the last two
    refinements disagree by more than ``tol``.
    """
    eta = as_robin(eta)
    t = float(t)
    if not t > 0:
        raise DomainError("k_spectral needs t > 0")
    x = float(x)
    xp = float(x_prime)
    theta, a, b = _contour(x, xp, t)
    if k_max is None:
        big = 52.0
        k_max = (b + math.sqrt(b * b + 4.0 * a * big)) / (2.0 * a)
        k_max *= 1.1
    order = 24
    if n_nodes is None:
        # phase rate of exp(-i k^2 t/2) and of the trig factors at the far end
        rate = k_max * t + (abs(x) + abs(xp))
        n_panels = max(4, int(math.ceil(k_max * rate / 3.0)))
        if not eta.is_dirichlet and eta.value != 0.0:
            n_panels = max(n_panels, int(math.ceil(k_max / (0.25 * abs(eta.value)))))
    else:
        n_panels = max(1, int(math.ceil(n_nodes / order)))
    vals = []
    for m in (1, 2, 4):
        vals.append(_rotated_integral(eta, x, xp, t, theta, k_max, m * n_panels, order))
    if abs(vals[2] - vals[1]) > tol:
        raise QuadratureError(
            f"spectral quadrature did not settle: |delta| = {abs(vals[2] - vals[1]):.3e}", t=t, estimate=vals[2]
        )
    out = vals[2]
    if include_bound_state and not eta.is_dirichlet and eta.value < 0:
        out += chi(eta, x) * chi(eta, xp) * np.exp(0.5j * eta.value**2 * t)
    return complex(out)
