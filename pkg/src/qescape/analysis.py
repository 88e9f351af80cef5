"""Survival series, decay-law fits, experiment configs and the exponent table."""
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .many_body import MAX_PARTICLES, OrbitalSet, Statistics, survival_N_overlap
from .propagator import as_robin
from .state import GaussianPacket, evolve_points, gauss_panels, time_scales

__all__ = [
    "SurvivalSeries",
    "DecayFit",
    "fit_decay",
    "tail_times",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run_experiment",
    "write_outputs",
    "saturation_constant",
    "predicted_exponent",
    "Table1Cell",
    "table1_report",
    "format_table1",
    "interference_series",
    "count_oscillations",
]

# fit window: the last two decades before T_max, never earlier than 4 t_a
T_MAX_FACTOR = 1.0e4
WINDOW_DECADES = 2.0
P_FLOOR = 1e-22
MIN_SAMPLES = 12
R2_MIN = 0.99
SATURATION_SLOPE = -0.1


@dataclass
class SurvivalSeries:
    times: np.ndarray
    probabilities: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.probabilities.shape:
            raise ValueError("times and probabilities must be 1-D arrays of equal length")
        if self.times.size and (np.any(self.times <= 0) or np.any(np.diff(self.times) <= 0)):
            raise ValueError("times must be positive and strictly increasing")
        if np.any(self.probabilities < 0) or np.any(self.probabilities > 1 + 1e-6):
            raise ValueError("probabilities must lie in [0, 1 + 1e-6]")

    def __len__(self):
        return self.times.size

    @property
    def t_a(self):
        return self.meta.get("t_a")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "P"])
            for t, p in zip(self.times, self.probabilities):
                w.writerow([repr(float(t)), repr(float(p))])

    @classmethod
    def from_csv(cls, path, meta=None):
        """Read a ``t,P`` file; a JSON sidecar next to it supplies ``meta``."""
        path = Path(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["t", "P"]:
            raise ValueError(f"{path}: expected a 't,P' header")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float).reshape(-1, 2)
        if meta is None:
            side = path.with_suffix(".json")
            meta = json.loads(side.read_text()).get("series", {}) if side.exists() else {}
        return cls(data[:, 0], data[:, 1], dict(meta))


@dataclass
class DecayFit:
    """Asymptotic law fitted to the tail of a survival series.

    ``kind`` is ``"power_law"`` (P ~ t^-alpha), ``"saturation"`` (P -> c) or
    ``"indeterminate"``.  ``reduced`` marks a fit on the precision-limited
    window, where P dropped below the floor before the nominal window ended.
    """

    kind: str
    alpha: float = None
    r2: float = None
    c: float = None
    fit_window: tuple = (None, None)
    last_decade_slope: float = None
    n_samples: int = 0
    reduced: bool = False
    note: str = ""

    def to_dict(self):
        return asdict(self)

    def __str__(self):
        lo, hi = self.fit_window
        win = f"[{lo:.4g}, {hi:.4g}]" if lo is not None else "[]"
        if self.kind == "power_law":
            body = f"alpha={self.alpha:.4f} r2={self.r2:.6f}"
        elif self.kind == "saturation":
            body = f"c={self.c:.5g}"
        else:
            body = self.note or "no fit"
        extra = " (precision-limited window)" if self.reduced else ""
        return f"{self.kind}: {body} on {win}, n={self.n_samples}{extra}"


def _linfit(x, y):
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def tail_times(t_a, t_max=None, n=60, decades=None):
    """Log-spaced sample times ending at ``t_max`` (default ``1e4 t_a``).

    The grid starts at the fit-window start, or ``decades`` before ``t_max``
    (never earlier than 4 t_a) when given.
    """
    t_max = T_MAX_FACTOR * t_a if t_max is None else float(t_max)
    span = WINDOW_DECADES if decades is None else decades
    t_lo = max(4.0 * t_a, t_max / 10.0**span)
    return np.geomspace(t_lo, t_max, n)


def fit_decay(series, t_a=None, t_max=None, floor=P_FLOOR, min_samples=MIN_SAMPLES):
    """Fit the asymptotic decay law of a survival series.

    Window: ``[max(4 t_a, T_max / 100), T_max]`` restricted to P > ``floor``,
    ``T_max`` defaulting to the last sample.  If fewer than ``min_samples``
    points survive the floor, the window slides back to the last two decades
    above it (flagged ``reduced``).  Saturation wins when the log-log slope
    over the last decade of the window exceeds -0.1.
    """
    t = series.times
    p = series.probabilities
    if t_a is None:
        t_a = series.t_a or 0.0
    t_hi = float(t[-1]) if t_max is None else float(t_max)
    start = max(4.0 * t_a, 2.0 * t_a, t_hi / 10.0**WINDOW_DECADES)
    eps = 1e-12
    base = (t <= t_hi * (1 + eps)) & (p > floor)
    win = base & (t >= start * (1 - eps))
    reduced = False
    if win.sum() < min_samples:
        ok = base & (t >= 4.0 * t_a * (1 - eps))
        if ok.sum() >= min_samples:
            hi = t[ok].max()
            win = ok & (t >= max(4.0 * t_a, hi / 10.0**WINDOW_DECADES) * (1 - eps))
            reduced = True
    n = int(win.sum())
    if n < min_samples:
        return DecayFit("indeterminate", n_samples=n, note=f"only {n} samples in the fit window (need {min_samples})")
    tw, pw = t[win], p[win]
    lt, lp = np.log(tw), np.log(pw)
    slope, r2 = _linfit(lt, lp)
    last = tw >= tw[-1] / 10.0
    last_slope = _linfit(lt[last], lp[last])[0] if last.sum() >= 3 else slope
    fit = DecayFit(
        "indeterminate",
        r2=r2,
        fit_window=(float(tw[0]), float(tw[-1])),
        last_decade_slope=last_slope,
        n_samples=n,
        reduced=reduced,
    )
    if last_slope > SATURATION_SLOPE:
        fit.kind = "saturation"
        fit.c = float(np.mean(pw[last]))
        fit.alpha = -slope
    elif r2 >= R2_MIN:
        fit.kind = "power_law"
        fit.alpha = -slope
    else:
        fit.note = f"r2={r2:.4f} below {R2_MIN} and tail slope {last_slope:.3f} not flat"
    return fit


def saturation_constant(eta, packet):
    """Leading-order large-t survival probability for eta < 0.

    Projecting a narrow packet onto the bound state gives
    ``C = 4 sqrt(pi) |eta| sigma exp(-2 q |eta|) (1 - exp(-2 |eta|))``.
    """
    e = as_robin(eta)
    if e.is_dirichlet or not e.value < 0:
        raise DomainError("saturation constant exists only for finite eta < 0")
    a = abs(e.value)
    return 4.0 * math.sqrt(math.pi) * a * packet.sigma * math.exp(-2.0 * packet.q * a) * (1.0 - math.exp(-2.0 * a))


# ---------------------------------------------------------------------------
# configuration

_KEYS = (
    "eta",
    "statistics",
    "n_particles",
    "q",
    "sigma",
    "t_min",
    "t_max",
    "n_times",
    "grid_density",
    "output",
    "frame_times",
)


def default_orbitals(n):
    """Default centers and widths: one packet at 0.6, or evenly spaced ones."""
    if n == 1:
        return (0.6,), (0.1,)
    if n == 2:
        return (0.3, 0.7), (0.05, 0.05)
    q = tuple(round((i + 1) / (n + 1), 6) for i in range(n))
    return q, (round(1.0 / (8.0 * (n + 1)), 6),) * n


@dataclass
class ExperimentConfig:
    eta: object = "inf"
    statistics: str = "boson"
    n_particles: int = 1
    q: tuple = None
    sigma: tuple = None
    t_min: float = None
    t_max: float = None
    n_times: int = 60
    grid_density: int = 2000
    output: str = "survival.csv"
    frame_times: tuple = ()

    def __post_init__(self):
        self.eta = as_robin(self.eta)
        self.statistics = Statistics.parse(self.statistics).value
        dq, ds = default_orbitals(self.n_particles)
        self.q = tuple(dq if self.q is None else self.q)
        self.sigma = tuple(ds if self.sigma is None else self.sigma)
        if len(self.sigma) == 1 and len(self.q) > 1:
            self.sigma = self.sigma * len(self.q)

    def validate(self):
        if not 1 <= self.n_particles <= MAX_PARTICLES:
            raise ConfigError(f"n_particles must be between 1 and {MAX_PARTICLES}")
        if len(self.q) != self.n_particles or len(self.sigma) != self.n_particles:
            raise ConfigError(
                f"n_particles={self.n_particles} but {len(self.q)} centers and {len(self.sigma)} widths given"
            )
        if self.n_times < 1:
            raise ConfigError("empty time grid: n_times must be at least 1")
        self.orbitals()
        t_min, t_max = self.time_range()
        if not (t_min > 0 and t_max >= t_min):
            raise ConfigError(f"need 0 < t_min <= t_max, got t_min={t_min}, t_max={t_max}")
        if self.grid_density < 2:
            raise ConfigError("grid_density must be at least 2 points per unit length")
        return self

    def orbitals(self):
        try:
            return OrbitalSet(list(zip(self.q, self.sigma)), self.statistics)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def time_range(self):
        t_a = self.orbitals().t_a
        t_max = T_MAX_FACTOR * t_a if self.t_max is None else self.t_max
        t_min = max(4.0 * t_a, t_max / 10.0**WINDOW_DECADES) if self.t_min is None else self.t_min
        return t_min, t_max

    def times(self):
        t_min, t_max = self.time_range()
        return np.geomspace(t_min, t_max, self.n_times)

    def to_dict(self):
        d = asdict(self)
        d["eta"] = self.eta.label
        d["t_min"], d["t_max"] = self.time_range()
        return d


def _floats(v):
    return tuple(float(s) for s in v.replace(";", ",").split(",") if s.strip())


_PARSERS = {
    "eta": lambda v: as_robin(v),
    "statistics": lambda v: Statistics.parse(v).value,
    "n_particles": int,
    "q": _floats,
    "sigma": _floats,
    "t_min": float,
    "t_max": float,
    "n_times": int,
    "grid_density": int,
    "output": str,
    "frame_times": _floats,
}


def parse_config(text):
    """Parse ``key = value`` lines into an :class:`ExperimentConfig`.

    ``#`` starts a comment.  List values (``q``, ``sigma``, ``frame_times``)
    are comma separated.  Unknown, duplicate or malformed keys raise
    :class:`ConfigError` naming the line.
    """
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace(" ", "_").replace("-", "_")
        if key.endswith("[]"):
            key = key[:-2]
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r} (known: {', '.join(_KEYS)})", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key][0]})", line=lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", line=lineno)
        try:
            seen[key] = (lineno, _PARSERS[key](value))
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from exc
    if "eta" not in seen:
        raise ConfigError("missing required key 'eta'")
    kwargs = {k: v for k, (_, v) in seen.items()}
    if "n_particles" not in kwargs and "q" in kwargs:
        kwargs["n_particles"] = len(kwargs["q"])
    try:
        cfg = ExperimentConfig(**kwargs)
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path):
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# running


def run_experiment(config, backend=None, check=True):
    """Survival probability on the config's log-spaced time grid."""
    config.validate()
    orbitals = config.orbitals()
    times = config.times()
    probs = np.array([survival_N_overlap(orbitals, config.eta, t, check=check, backend=backend) for t in times])
    meta = {
        "eta": config.eta.label,
        "statistics": orbitals.statistics.value,
        "n_particles": orbitals.n,
        "packets": [[p.q, p.sigma] for p in orbitals.packets],
        "t_a": orbitals.t_a,
    }
    return SurvivalSeries(times, np.clip(probs, 0.0, None), meta)


def write_outputs(series, fit, config, path=None):
    """Write the ``t,P`` CSV and its JSON sidecar; returns both paths."""
    path = Path(path or config.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    series.to_csv(path)
    side = path.with_suffix(".json")
    payload = {"config": config.to_dict(), "series": series.meta, "fit": fit.to_dict()}
    packets = series.meta.get("packets", [])
    if as_robin(config.eta).regime == "negative" and len(packets) == 1:
        payload["saturation_constant"] = saturation_constant(config.eta, GaussianPacket(*packets[0]))
    side.write_text(json.dumps(payload, indent=2))
    return path, side


# ---------------------------------------------------------------------------
# exponent table

REGIMES = (("eta<0", -2.0), ("eta=0", 0.0), ("eta>0", 2.0), ("eta=inf", math.inf))

_SYMBOLIC = {
    ("boson", "eta<0"): "const",
    ("boson", "eta=0"): "t^-N",
    ("boson", "eta>0"): "t^-3N",
    ("boson", "eta=inf"): "t^-3N",
    ("fermion", "eta<0"): "t^-(N-1)(2N-1)",
    ("fermion", "eta=0"): "t^-N(2N-1)",
    ("fermion", "eta>0"): "t^-N(2N+1)",
    ("fermion", "eta=inf"): "t^-N(2N+1)",
}

# tolerances on the fitted exponent for the numerically checked cells
_TOL = {
    (1, "eta=0"): 0.1,
    (1, "eta>0"): 0.15,
    (1, "eta=inf"): 0.15,
    (2, "boson", "eta=0"): 0.2,
    (2, "boson", "eta>0"): 0.4,
    (2, "boson", "eta=inf"): 0.4,
    (2, "fermion", "eta<0"): 0.3,
    (2, "fermion", "eta=0"): 0.4,
    (2, "fermion", "eta>0"): 0.7,
    (2, "fermion", "eta=inf"): 0.7,
}


def predicted_exponent(n, statistics, regime):
    """Predicted decay exponent alpha in P ~ t^-alpha (0 means saturation)."""
    stats = Statistics.parse(statistics)
    if regime not in dict(REGIMES):
        raise ValueError(f"unknown regime {regime!r}")
    if stats is Statistics.BOSON or n == 1:
        return {"eta<0": 0, "eta=0": n, "eta>0": 3 * n, "eta=inf": 3 * n}[regime]
    return {
        "eta<0": (n - 1) * (2 * n - 1),
        "eta=0": n * (2 * n - 1),
        "eta>0": n * (2 * n + 1),
        "eta=inf": n * (2 * n + 1),
    }[regime]


def exponent_tolerance(n, statistics, regime):
    stats = Statistics.parse(statistics).value
    key = (n, regime) if n == 1 else (n, stats, regime)
    return _TOL.get(key, 0.07 * predicted_exponent(n, stats, regime))


@dataclass
class Table1Cell:
    n: int
    statistics: str
    regime: str
    eta: float
    symbolic: str
    predicted: int
    fit: DecayFit = None
    tolerance: float = None
    status: str = "symbolic"

    @property
    def fitted(self):
        if self.fit is None:
            return None
        return self.fit.alpha if self.fit.kind == "power_law" else self.fit.kind


def _judge(cell):
    fit = cell.fit
    if cell.predicted == 0:
        return "pass" if fit.kind == "saturation" else "fail"
    if fit.kind == "saturation" or fit.alpha is None:
        return "fail"
    if abs(fit.alpha - cell.predicted) > cell.tolerance:
        return "fail"
    if fit.reduced or fit.kind != "power_law":
        return "slope-consistent"
    return "pass"


def table1_report(max_n=2, numeric=True, numeric_max_n=2, n_times=80, backend=None, check=False):
    """Predicted exponent matrix with numerical fits for small N.

    Cells up to ``max_n`` (at most 4) carry the predicted law; cells with
    N <= ``numeric_max_n`` are also fitted on a series sampled log-uniformly
    over ``[4 t_a, 1e4 t_a]`` with the default orbitals.
    """
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be between 1 and 4")
    numeric_max_n = min(numeric_max_n, 2, max_n)
    cells = []
    for n in range(1, max_n + 1):
        for stats in ("boson",) if n == 1 else ("boson", "fermion"):
            q, s = default_orbitals(n)
            orbitals = OrbitalSet(list(zip(q, s)), stats)
            for regime, eta in REGIMES:
                cell = Table1Cell(n, stats, regime, eta, _SYMBOLIC[(stats, regime)], predicted_exponent(n, stats, regime))
                if numeric and n <= numeric_max_n:
                    t_a = orbitals.t_a
                    times = np.geomspace(4.0 * t_a, T_MAX_FACTOR * t_a, n_times)
                    probs = [survival_N_overlap(orbitals, eta, t, check=check, backend=backend) for t in times]
                    series = SurvivalSeries(times, np.clip(probs, 0.0, None), {"t_a": t_a})
                    cell.fit = fit_decay(series)
                    cell.tolerance = exponent_tolerance(n, stats, regime)
                    cell.status = _judge(cell)
                cells.append(cell)
    return cells


def format_table1(cells):
    head = f"{'N':>2} {'stats':8} {'regime':8} {'law':16} {'pred':>5} {'fitted':>14} {'window':>20} status"
    lines = [head, "-" * len(head)]
    for c in cells:
        if c.fit is None:
            fitted, window = "", ""
        elif c.fit.kind == "power_law" or (c.fit.alpha is not None and c.predicted):
            fitted = f"{c.fit.alpha:.3f}+-{c.tolerance:g}" if c.tolerance else f"{c.fit.alpha:.3f}"
            lo, hi = c.fit.fit_window
            window = f"[{lo:.3g},{hi:.3g}]"
        elif c.fit.kind == "saturation":
            fitted = f"sat c={c.fit.c:.4f}"
            lo, hi = c.fit.fit_window
            window = f"[{lo:.3g},{hi:.3g}]"
        else:
            fitted, window = "indeterminate", ""
        stats = "-" if c.n == 1 else c.statistics
        pred = "0" if c.predicted == 0 else str(c.predicted)
        lines.append(f"{c.n:>2} {stats:8} {c.regime:8} {c.symbolic:16} {pred:>5} {fitted:>14} {window:>20} {c.status}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# oscillations of the single-particle survival probability


def interference_series(packet, times, backend=None):
    """Wall-interference part of P(t): ``(P_Neumann - P_Dirichlet) / 2``.

    Formed at amplitude level, ``Re[(a + b) conj(a - b)] / 2`` integrated over
    (0, 1), so it keeps its relative accuracy where it is exponentially small.
    """
    out = np.empty(len(times))
    b_hi = packet.support()[1]
    for i, t in enumerate(times):
        n = max(40, int(math.ceil((1.0 + b_hi) / (10.0 * t))))
        x, w = gauss_panels(np.linspace(0.0, 1.0, n + 1))
        a, _ = evolve_points(packet, 0.0, t, x, backend=backend)
        b, _ = evolve_points(packet, "inf", t, x, backend=backend)
        out[i] = 0.5 * np.dot(w, np.real((a + b) * np.conj(a - b)))
    return out


def count_oscillations(packet, n_times=800, backend=None):
    """Oscillation cycles of P(t) between wall contact and the asymptotic onset.

    Counts sign changes of the interference term on a grid uniform in 1/t
    over (t_w, t_a); two sign changes make one cycle.  Returns
    ``(cycles, times, interference)``.
    """
    sc = time_scales(packet)
    times = 1.0 / np.linspace(1.0 / sc["t_w"], 1.0 / sc["t_a"], n_times)
    x = interference_series(packet, times, backend=backend)
    s = np.sign(x)
    s = s[s != 0]
    crossings = int(np.count_nonzero(s[1:] != s[:-1]))
    return crossings / 2.0, times, x
