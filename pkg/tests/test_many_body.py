import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qescape.errors import DomainError
from qescape.many_body import (
    NormalizationWarning,
    OrbitalSet,
    Statistics,
    determinant,
    gram_matrix,
    overlap_matrix,
    permanent,
    survival_1,
    survival_2_grid,
    survival_N_overlap,
    symmetrized_kernel,
)
from qescape.propagator import k_robin
from qescape.state import GaussianPacket, time_scales

PAIR = [(0.3, 0.05), (0.7, 0.05)]


def brute_permanent(a):
    n = len(a)
    return sum(np.prod([a[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_determinant_matches_lapack(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n)) + 1j * np.random.default_rng(seed + 1).normal(size=(n, n))
    assert determinant(a) == pytest.approx(np.linalg.det(a), rel=1e-10, abs=1e-12)


def test_permanent_known_values():
    assert permanent(np.ones((4, 4))) == 24
    a = np.arange(9.0).reshape(3, 3)
    assert permanent(a) == pytest.approx(brute_permanent(a))
    assert permanent(np.eye(5)) == 1


def test_size_guard():
    with pytest.raises(DomainError):
        permanent(np.ones((7, 7)))


def test_statistics_parse():
    assert Statistics.parse("Bosons") is Statistics.BOSON
    assert Statistics.parse("f") is Statistics.FERMION
    assert Statistics.FERMION.sign == -1
    with pytest.raises(ValueError):
        Statistics.parse("anyon")


def test_identical_fermions_rejected():
    with pytest.raises(DomainError):
        OrbitalSet([(0.5, 0.1), (0.5, 0.1)], "fermion")
    OrbitalSet([(0.5, 0.1), (0.5, 0.1)], "boson")


def test_single_particle_kernel_is_the_propagator():
    assert symmetrized_kernel(2.0, "boson", [0.3], [0.6], 0.4) == k_robin(2.0, 0.3, 0.6, 0.4)


@pytest.mark.parametrize("stats", ["boson", "fermion"])
def test_two_particle_kernel_formula(stats):
    x, xp, t, eta = (0.2, 0.9), (0.5, 0.4), 0.3, -1.0
    k = lambda a, b: k_robin(eta, a, b, t)
    s = 1 if stats == "boson" else -1
    expected = (k(x[0], xp[0]) * k(x[1], xp[1]) + s * k(x[1], xp[0]) * k(x[0], xp[1])) / math.sqrt(2)
    assert symmetrized_kernel(eta, stats, x, xp, t) == pytest.approx(expected, rel=1e-13)


def test_fermion_kernel_vanishes_at_coincidence():
    assert abs(symmetrized_kernel(2.0, "fermion", [0.4, 0.4, 0.8], [0.1, 0.5, 0.7], 0.2)) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1.5), min_size=3, max_size=3), st.sampled_from([(0, 1), (0, 2), (1, 2)]))
def test_exchange_symmetry(xs, swap):
    xp = [0.2, 0.5, 0.8]
    i, j = swap
    ys = list(xs)
    ys[i], ys[j] = ys[j], ys[i]
    for stats, sign in (("boson", 1), ("fermion", -1)):
        a = symmetrized_kernel(-0.5, stats, xs, xp, 0.3)
        b = symmetrized_kernel(-0.5, stats, ys, xp, 0.3)
        assert abs(b - sign * a) <= 1e-12 * max(1.0, abs(a))


def test_mismatched_lengths():
    with pytest.raises(DomainError):
        symmetrized_kernel(1.0, "boson", [0.1, 0.2], [0.3], 0.1)


def test_gram_matrix_nearly_identity():
    g = gram_matrix(OrbitalSet(PAIR, "boson"))
    assert np.allclose(np.diag(g), 1.0, atol=1e-12)
    assert abs(g[0, 1]) < 1e-6


def test_overlap_matrix_hermitian_with_bounded_diagonal():
    m = overlap_matrix(OrbitalSet(PAIR, "fermion"), 2.0, 0.5)
    assert np.allclose(m, m.conj().T, atol=1e-12)
    d = np.diag(m).real
    assert np.all((d >= 0) & (d <= 1 + 1e-9))


def test_overlapping_orbitals_warn_and_renormalize():
    orb = OrbitalSet([(0.45, 0.1), (0.55, 0.1)], "boson")
    with pytest.warns(NormalizationWarning):
        p0 = survival_N_overlap(orb, 0.0, 0.005)
    assert p0 == pytest.approx(1.0, abs=1e-3)


def test_single_particle_reduces_to_survival_1(packet):
    a = survival_N_overlap(OrbitalSet([packet], "fermion"), 2.0, 0.3)
    assert a == pytest.approx(survival_1(packet, 2.0, 0.3), rel=1e-12)


def test_no_decay_before_leakage(packet):
    t_d = time_scales(packet)["t_d"]
    for eta in ("inf", 0.0, 2.0, -2.0):
        for t in (t_d,):
            assert survival_1(packet, eta, t) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("bc,sign", [(0.0, 1.0), ("inf", -1.0)])
def test_long_time_survival_approximation(packet, bc, sign):
    """P ~ (2 sigma / (sqrt(pi) t)) [1 +- (t / 2q) sin(2q/t)] once t >> sigma^2."""
    q, s = packet.q, packet.sigma
    for t in (3 * time_scales(packet)["t_a"], 6 * time_scales(packet)["t_a"], 5.0):
        approx = 2 * s / (math.sqrt(math.pi) * t) * (1 + sign * (t / (2 * q)) * math.sin(2 * q / t))
        assert survival_1(packet, bc, t) == pytest.approx(approx, rel=0.05)


@pytest.mark.parametrize("eta", [0.0, 2.0, "inf"])
def test_monotone_tail_for_nonnegative_eta(eta):
    orb = OrbitalSet(PAIR, "boson")
    ts = np.geomspace(orb.t_a, 50 * orb.t_a, 15)
    p = [survival_N_overlap(orb, eta, t) for t in ts]
    assert np.all(np.diff(p) <= 1e-12)
    assert all(0 <= v <= 1 + 1e-6 for v in p)


@pytest.mark.parametrize("eta", [-2.0, 0.0, 2.0, "inf"])
def test_bosons_survive_longer_than_fermions(eta):
    t = 10.0
    pb = survival_N_overlap(OrbitalSet(PAIR, "boson"), eta, t)
    pf = survival_N_overlap(OrbitalSet(PAIR, "fermion"), eta, t)
    assert pb > pf


def test_grid_oracle_initial_bosons():
    assert survival_2_grid(OrbitalSet(PAIR, "boson"), 2.0, 0.002) == pytest.approx(1.0, abs=1e-3)


def test_grid_oracle_needs_two_particles():
    with pytest.raises(DomainError):
        survival_2_grid(OrbitalSet([(0.5, 0.1)], "boson"), 0.0, 0.1)


def test_grid_oracle_documented_point():
    orb = OrbitalSet(PAIR, "fermion")
    assert survival_2_grid(orb, "inf", 1.0) == pytest.approx(survival_N_overlap(orb, "inf", 1.0), abs=1e-6)


def test_three_fermions_structural():
    orb = OrbitalSet([(0.25, 0.04), (0.5, 0.04), (0.75, 0.04)], "fermion")
    with warnings.catch_warnings():
        warnings.simplefilter("error", NormalizationWarning)
        p = [survival_N_overlap(orb, "inf", t) for t in (0.05, 0.5, 5.0)]
    assert 1 >= p[0] > p[1] > p[2] > 0
