import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qescape.analysis import (
    DecayFit,
    ExperimentConfig,
    SurvivalSeries,
    count_oscillations,
    fit_decay,
    parse_config,
    predicted_exponent,
    run_experiment,
    saturation_constant,
    tail_times,
    write_outputs,
)
from qescape.errors import ConfigError, DomainError
from qescape.state import GaussianPacket


def synthetic(fn, t_a=0.2, n=60):
    t = tail_times(t_a, n=n)
    return SurvivalSeries(t, fn(t), {"t_a": t_a})


class TestFitter:
    def test_exact_power_law(self):
        fit = fit_decay(synthetic(lambda t: 7 * t**-3.0))
        assert fit.kind == "power_law"
        assert fit.alpha == pytest.approx(3.0, abs=1e-6)
        assert fit.r2 == pytest.approx(1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.3, 12.0), st.floats(1e-6, 1.0))
    def test_recovers_any_power_law(self, alpha, amp):
        t = tail_times(0.1, n=40)
        p = amp * (t / t[0]) ** -alpha
        fit = fit_decay(SurvivalSeries(t, p, {"t_a": 0.1}), floor=0.0)
        assert fit.kind == "power_law"
        assert fit.alpha == pytest.approx(alpha, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 0.9), st.floats(0.0, 0.5), st.floats(1.5, 3.0))
    def test_saturating_series(self, c, b, alpha):
        fit = fit_decay(synthetic(lambda t: np.minimum(1.0, c + b * t**-alpha)))
        assert fit.kind == "saturation"
        assert fit.c == pytest.approx(c, rel=0.02)
        assert fit.last_decade_slope > -0.1

    def test_window_defaults(self):
        t = np.geomspace(0.01, 1000, 200)
        fit = fit_decay(SurvivalSeries(t, t**-1.0 / 200, {"t_a": 0.5}))
        assert fit.fit_window[0] == pytest.approx(10.0, rel=0.05)
        assert fit.fit_window[1] == pytest.approx(1000.0)

    def test_short_window_is_capped_at_four_t_a(self):
        t = np.geomspace(0.01, 20.0, 200)
        fit = fit_decay(SurvivalSeries(t, np.minimum(1, t**-2.0), {"t_a": 0.5}))
        assert fit.fit_window[0] >= 2.0

    def test_floor_moves_window_back(self):
        t = np.geomspace(0.1, 1e4, 120)
        fit = fit_decay(SurvivalSeries(t, np.minimum(1.0, 1e-3 * t**-10.0), {"t_a": 0.05}))
        assert fit.reduced and fit.kind == "power_law"
        assert fit.alpha == pytest.approx(10.0, abs=1e-6)
        assert 1e-3 * fit.fit_window[1] ** -10 > 1e-22

    def test_too_few_samples(self):
        t = np.geomspace(1, 10, 8)
        fit = fit_decay(SurvivalSeries(t, t**-1.0, {"t_a": 0.1}))
        assert fit.kind == "indeterminate" and "samples" in fit.note

    def test_noisy_series_is_indeterminate(self):
        rng = np.random.default_rng(0)
        t = tail_times(0.1, n=60)
        p = np.clip(t**-2.0 * np.exp(rng.normal(0, 3.0, t.size)), 0, 1)
        fit = fit_decay(SurvivalSeries(t, p, {"t_a": 0.1}))
        assert fit.kind == "indeterminate"
        assert fit.r2 < 0.99

    def test_fit_serializes(self):
        fit = fit_decay(synthetic(lambda t: t**-1.0 * 0.1))
        d = json.loads(json.dumps(fit.to_dict()))
        assert d["kind"] == "power_law"
        assert "alpha" in str(fit)


class TestSeries:
    def test_csv_roundtrip(self, tmp_path):
        s = SurvivalSeries([0.1, 0.2, 0.4], [1.0, 0.5, 0.25], {"t_a": 0.01})
        path = tmp_path / "s.csv"
        s.to_csv(path)
        assert path.read_text().splitlines()[0] == "t,P"
        back = SurvivalSeries.from_csv(path, meta={})
        assert np.array_equal(back.times, s.times) and np.array_equal(back.probabilities, s.probabilities)

    @pytest.mark.parametrize(
        "t,p",
        [([0.1, 0.1], [1, 1]), ([0.2, 0.1], [1, 1]), ([0.1], [1.1]), ([0.1], [-0.1]), ([-1.0], [0.5]), ([1, 2], [1])],
    )
    def test_invalid(self, t, p):
        with pytest.raises(ValueError):
            SurvivalSeries(t, p)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("time,prob\n1,1\n")
        with pytest.raises(ValueError):
            SurvivalSeries.from_csv(path)


class TestConfig:
    def test_minimal(self):
        cfg = parse_config("eta = inf\n")
        assert cfg.eta.is_dirichlet and cfg.q == (0.6,) and cfg.sigma == (0.1,)
        t_min, t_max = cfg.time_range()
        assert t_max == pytest.approx(1e4 * 0.6 / math.pi)
        assert t_min == pytest.approx(t_max / 100)

    def test_full(self):
        text = """
        # two fermions
        eta = -2
        statistics = fermion
        n_particles = 2
        q = 0.3, 0.7
        sigma = 0.05     # shared width
        t_min = 0.5
        t_max = 50
        n_times = 24
        grid_density = 3000
        output = out/run.csv
        frame_times = 0.1, 0.2
        """
        cfg = parse_config(text)
        assert cfg.statistics == "fermion" and cfg.sigma == (0.05, 0.05)
        assert cfg.times()[0] == 0.5 and cfg.times().size == 24
        assert cfg.frame_times == (0.1, 0.2)

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("eta = 1\nbogus = 3\n", 2, "unknown key"),
            ("eta = 1\n\n# c\nq 0.5\n", 4, "key = value"),
            ("eta = 1\neta = 2\n", 2, "duplicate"),
            ("eta = 1\nn_times = many\n", 2, "n_times"),
            ("eta = wall\n", 1, "eta"),
            ("eta = 1\nstatistics = anyon\n", 2, "statistics"),
            ("eta = 1\nq =\n", 2, "missing value"),
        ],
    )
    def test_line_precise_errors(self, text, line, fragment):
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.line == line
        assert str(exc.value).startswith(f"line {line}:")
        assert fragment in str(exc.value)

    @pytest.mark.parametrize(
        "text",
        [
            "statistics = boson\n",
            "eta = 1\nn_times = 0\n",
            "eta = 1\nn_particles = 2\nq = 0.5\n",
            "eta = 1\nq = 0.1\n",
            "eta = 1\nt_min = 5\nt_max = 1\n",
            "eta = 1\nstatistics = fermion\nq = 0.5, 0.5\nsigma = 0.1\n",
            "eta = 1\nn_particles = 7\n",
        ],
    )
    def test_invalid_configs(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


def test_run_and_outputs(tmp_path):
    cfg = parse_config(f"eta = 0\nt_min = 1\nt_max = 100\nn_times = 20\noutput = {tmp_path}/a/s.csv\n")
    series = run_experiment(cfg)
    again = run_experiment(cfg)
    assert np.array_equal(series.probabilities, again.probabilities)
    fit = fit_decay(series)
    csv_path, side = write_outputs(series, fit, cfg)
    meta = json.loads(side.read_text())
    assert meta["config"]["eta"] == "0.0" and meta["fit"]["kind"] == "power_law"
    assert SurvivalSeries.from_csv(csv_path).t_a == pytest.approx(0.6 / math.pi)


def test_sidecar_carries_saturation_constant(tmp_path):
    cfg = parse_config(f"eta = -2\nt_min = 5\nt_max = 50\nn_times = 12\noutput = {tmp_path}/s.csv\n")
    series = run_experiment(cfg)
    _, side = write_outputs(series, fit_decay(series), cfg)
    assert json.loads(side.read_text())["saturation_constant"] == pytest.approx(0.1263, abs=1e-4)


class TestSaturationConstant:
    def test_showcase_value(self):
        assert saturation_constant(-2.0, GaussianPacket(0.6, 0.1)) == pytest.approx(0.126, abs=1e-3)

    def test_vanishes_as_eta_goes_to_zero(self):
        p = GaussianPacket(0.6, 0.1)
        vals = [saturation_constant(-e, p) for e in (1e-2, 1e-4, 1e-6)]
        assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-10

    @pytest.mark.parametrize("eta", [0.0, 1.0, "inf", "-inf"])
    def test_domain(self, eta):
        with pytest.raises(DomainError):
            saturation_constant(eta, GaussianPacket(0.6, 0.1))


@pytest.mark.parametrize(
    "n,stats,regime,alpha",
    [
        (3, "boson", "eta>0", 9),
        (4, "boson", "eta=0", 4),
        (3, "fermion", "eta=0", 15),
        (2, "fermion", "eta<0", 3),
        (2, "fermion", "eta=inf", 10),
        (1, "fermion", "eta<0", 0),
        (4, "fermion", "eta>0", 36),
    ],
)
def test_predicted_exponents(n, stats, regime, alpha):
    assert predicted_exponent(n, stats, regime) == alpha


@settings(max_examples=20)
@given(st.integers(1, 6), st.sampled_from(["boson", "fermion"]))
def test_predicted_exponent_ordering(n, stats):
    a = [predicted_exponent(n, stats, r) for r in ("eta<0", "eta=0", "eta>0", "eta=inf")]
    assert a[0] < a[1] < a[2] == a[3]
    if stats == "fermion" and n == 2:
        assert a[1] == predicted_exponent(2, "boson", "eta=inf")


def test_oscillation_count_small_grid():
    cycles, times, x = count_oscillations(GaussianPacket(0.6, 0.1), n_times=150)
    assert times[0] == pytest.approx(0.02) and times[-1] == pytest.approx(0.6 / math.pi)
    assert 4 <= cycles <= 10
