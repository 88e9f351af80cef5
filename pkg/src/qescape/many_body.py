"""Symmetrized N-particle kernels and survival probabilities.

For non-interacting particles the N-body survival probability reduces to
the single-particle overlap matrix on the unit interval,

    M_ij(t) = int_0^1 conj(psi_i(x, t)) psi_j(x, t) dx,

through P = det M / det G (fermions) or perm M / perm G (bosons), with G the
Gram matrix of the initial orbitals on the half-line; this normalizes the
symmetrized state exactly rather than assuming orthogonal orbitals.
"""
import enum
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, QuadratureError
from .propagator import as_robin, k_robin
from .state import GL_ORDER, PANEL_PHASE, GaussianPacket, evolve_points, gauss_panels

__all__ = [
    "Statistics",
    "OrbitalSet",
    "NormalizationWarning",
    "permanent",
    "determinant",
    "symmetrized_kernel",
    "gram_matrix",
    "overlap_matrix",
    "survival_1",
    "survival_N_overlap",
    "survival_2_grid",
]

MAX_PARTICLES = 6


class NormalizationWarning(UserWarning):
    """The 1/sqrt(N!) normalization is off by more than 1e-6 for these orbitals."""


class Statistics(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"

    @property
    def sign(self):
        return 1 if self is Statistics.BOSON else -1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        s = str(value).strip().lower()
        for alias, member in (("b", cls.BOSON), ("f", cls.FERMION)):
            if s in (alias, member.value, member.value + "s"):
                return member
        raise ValueError(f"unknown statistics {value!r}")


@dataclass(frozen=True)
class OrbitalSet:
    packets: tuple
    statistics: Statistics

    def __init__(self, packets, statistics):
        packets = tuple(p if isinstance(p, GaussianPacket) else GaussianPacket(*p) for p in packets)
        stats = Statistics.parse(statistics)
        if not packets:
            raise DomainError("need at least one orbital")
        if stats is Statistics.FERMION and len(set(packets)) != len(packets):
            raise DomainError("identical fermionic orbitals: the antisymmetrized state vanishes")
        object.__setattr__(self, "packets", packets)
        object.__setattr__(self, "statistics", stats)

    @property
    def n(self):
        return len(self.packets)

    @property
    def t_a(self):
        """Onset of the asymptotic regime, set by the outermost packet."""
        return max(p.q for p in self.packets) / math.pi


def _parity(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _perm_sum(a, signed):
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if n > MAX_PARTICLES:
        raise DomainError(f"explicit permutation sums are limited to N <= {MAX_PARTICLES}")
    total = 0j
    rows = np.arange(n)
    for p in itertools.permutations(range(n)):
        term = np.prod(a[rows, list(p)])
        total += _parity(p) * term if signed else term
    return total


def permanent(a):
    """Permanent by the explicit sum over permutations."""
    return _perm_sum(a, signed=False)


def determinant(a):
    """Determinant by the explicit signed sum over permutations."""
    return _perm_sum(a, signed=True)


def symmetrized_kernel(eta, statistics, xs, xs_prime, t):
    """``(1/sqrt(N!)) sum_pi eps(pi) prod_i K(x_i, x'_pi(i), t)``."""
    xs = np.asarray(xs, dtype=float)
    xps = np.asarray(xs_prime, dtype=float)
    if xs.ndim != 1 or xs.shape != xps.shape or xs.size == 0:
        raise DomainError("xs and xs_prime must be non-empty and of equal length")
    stats = Statistics.parse(statistics)
    a = k_robin(eta, xs[:, None], xps[None, :], t)
    n = xs.size
    s = permanent(a) if stats is Statistics.BOSON else determinant(a)
    return complex(s / math.sqrt(math.factorial(n)))


def gram_matrix(orbitals):
    """Overlaps of the initial orbitals on the half-line."""
    lo = min(p.support()[0] for p in orbitals.packets)
    hi = max(p.support()[1] for p in orbitals.packets)
    smin = min(p.sigma for p in orbitals.packets)
    edges = np.linspace(lo, hi, int(math.ceil((hi - lo) / smin)) + 1)
    x, w = gauss_panels(edges)
    vals = np.array([p(x) for p in orbitals.packets])
    return (vals * w) @ vals.T


def _target_edges(orbitals, t, scale=1):
    smin = min(p.sigma for p in orbitals.packets)
    b = max(p.support()[1] for p in orbitals.packets)
    n = int(math.ceil(1.0 / (1.5 * smin)))
    if t > 0:
        n = max(n, int(math.ceil((1.0 + b) / (PANEL_PHASE * t))))
    return np.linspace(0.0, 1.0, scale * n + 1)


def _amplitudes(orbitals, eta, t, x, check, backend):
    rows = []
    err = 0.0
    for p in orbitals.packets:
        v, e = evolve_points(p, eta, t, x, check=check, backend=backend)
        rows.append(v)
        if check:
            err = max(err, e)
    return np.array(rows), err


def overlap_matrix(orbitals, eta, t, check=True, backend=None, _scale=1):
    """``M_ij(t) = int_0^1 conj(psi_i) psi_j dx`` with composite Gauss-Legendre."""
    x, w = gauss_panels(_target_edges(orbitals, t, _scale))
    amps, _ = _amplitudes(orbitals, eta, t, x, check, backend)
    return (amps.conj() * w) @ amps.T


def _gram_det(amps, w):
    # amplitude-level determinant: det(B^H B) = prod |R_ii|^2, B = sqrt(w) psi^T
    b = (amps * np.sqrt(w)).T
    r = np.linalg.qr(b, mode="r")
    return float(np.prod(np.abs(np.diag(r)) ** 2))


def _contract(orbitals, amps, w):
    if orbitals.statistics is Statistics.FERMION:
        return _gram_det(amps, w)
    m = (amps.conj() * w) @ amps.T
    return float(permanent(m).real)


def _normalizer(orbitals):
    g = gram_matrix(orbitals)
    if orbitals.statistics is Statistics.FERMION:
        val = float(determinant(g).real)
        if val < 1e-12:
            raise DomainError("fermionic orbitals are (numerically) linearly dependent; the state vanishes")
    else:
        val = float(permanent(g).real)
    if abs(val - 1.0) > 1e-6:
        warnings.warn(
            f"symmetrized initial state with 1/sqrt(N!) has norm {val:.9f}; renormalizing",
            NormalizationWarning,
            stacklevel=3,
        )
    return val


def survival_N_overlap(orbitals, eta, t, check=True, rtol=1e-8, atol=1e-12, backend=None):
    """N-particle survival probability through the overlap-matrix contraction.

    With ``check`` the target quadrature is repeated on halved panels and the
    two estimates must agree to ``max(atol, rtol * P)``.
    """
    if orbitals.n > MAX_PARTICLES:
        raise DomainError(f"survival_N_overlap supports N <= {MAX_PARTICLES}")
    eta = as_robin(eta)
    norm0 = _normalizer(orbitals)

    def once(scale):
        x, w = gauss_panels(_target_edges(orbitals, t, scale))
        amps, _ = _amplitudes(orbitals, eta, t, x, check, backend)
        return _contract(orbitals, amps, w) / norm0

    p = once(1)
    if check:
        p2 = once(2)
        if abs(p2 - p) > max(atol, rtol * abs(p2)):
            raise QuadratureError(f"target quadrature not converged at t={t:g}: {p} vs {p2}", t=t, estimate=p2)
        p = p2
    return p


def survival_1(packet, eta, t, **kwargs):
    """Single-particle survival probability ``int_0^1 |Psi(x,t)|^2 dx``."""
    return survival_N_overlap(OrbitalSet([packet], Statistics.BOSON), eta, t, **kwargs)


def survival_2_grid(orbitals, eta, t, grid2d=1201, backend=None):
    """Two-particle survival from the explicit symmetrized wave function.

    Builds ``Psi(x1, x2) = A [psi_1(x1) psi_2(x2) +- psi_1(x2) psi_2(x1)]`` on a
    uniform ``grid2d x grid2d`` mesh over the unit square and integrates
    |Psi|^2 with Simpson's rule in both directions.  ``A`` fixes the norm of
    the initial symmetrized state to one.
    """
    if orbitals.n != 2:
        raise DomainError("survival_2_grid is the two-particle oracle")
    eta = as_robin(eta)
    if grid2d % 2 == 0:
        grid2d += 1
    x = np.linspace(0.0, 1.0, grid2d)
    p1, p2 = orbitals.packets
    a1, _ = evolve_points(p1, eta, t, x, backend=backend)
    a2, _ = evolve_points(p2, eta, t, x, backend=backend)
    sign = orbitals.statistics.sign
    g12 = gram_matrix(orbitals)[0, 1]
    norm2 = 1.0 + sign * abs(g12) ** 2
    psi = (np.outer(a1, a2) + sign * np.outer(a2, a1)) / math.sqrt(2.0 * norm2)
    dens = np.abs(psi) ** 2
    return float(simpson(simpson(dens, x=x, axis=1), x=x))
