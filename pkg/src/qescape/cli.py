"""Command-line entry point: ``escape run|fit|table1|frames``."""
import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    SurvivalSeries,
    fit_decay,
    format_table1,
    load_config,
    run_experiment,
    table1_report,
    write_outputs,
)
from .errors import ConfigError, DomainError, QuadratureError
from .propagator import as_robin
from .state import GaussianPacket, SpatialGrid, evolve


def _times(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}")
    if not vals or any(t < 0 for t in vals):
        raise argparse.ArgumentTypeError("times must be a non-empty list of non-negative numbers")
    return vals


def frame_path(outdir, eta, t):
    return Path(outdir) / f"frame_eta{as_robin(eta).label}_t{t:.6g}.csv"


def write_frames(packet, eta, times, outdir, density=2000, backend=None):
    """One ``x,re,im,density`` file per time; returns the paths."""
    Path(outdir).mkdir(parents=True, exist_ok=True)
    paths = []
    for t in times:
        grid = SpatialGrid.for_packet(packet, t, density=density)
        state = evolve(packet, eta, t, grid, backend=backend)
        path = frame_path(outdir, eta, t)
        state.to_csv(path)
        paths.append(path)
    return paths


def cmd_run(args):
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    series = run_experiment(cfg, backend=args.backend)
    fit = fit_decay(series)
    csv_path, side = write_outputs(series, fit, cfg)
    print(f"wrote {csv_path} ({len(series)} samples) and {side}")
    print(f"fit: {fit}")
    if cfg.frame_times:
        if cfg.n_particles != 1:
            print("frame_times ignored: density frames are single-particle only", file=sys.stderr)
        else:
            packet = GaussianPacket(cfg.q[0], cfg.sigma[0])
            for p in write_frames(packet, cfg.eta, cfg.frame_times, csv_path.parent, cfg.grid_density, args.backend):
                print(f"wrote {p}")
    return 0


def cmd_fit(args):
    series = SurvivalSeries.from_csv(args.series)
    fit = fit_decay(series, t_a=args.t_a, t_max=args.t_max)
    if args.json:
        print(json.dumps(fit.to_dict(), indent=2))
    else:
        print(fit)
    return 0


def cmd_table1(args):
    cells = table1_report(max_n=args.max_n, numeric=not args.symbolic, backend=args.backend)
    print(format_table1(cells))
    failed = [c for c in cells if c.status == "fail"]
    return 1 if failed else 0


def cmd_frames(args):
    packet = GaussianPacket(args.q, args.sigma)
    for p in write_frames(packet, args.eta, args.times, args.outdir, args.density, args.backend):
        print(f"wrote {p}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="escape", description="Quantum escape through a Robin wall on the half-line.")
    parser.add_argument("--backend", choices=["auto", "numba", "numpy"], default=None, help="kernel backend")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="survival series from a key=value config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override the config's output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="fit the decay law of a t,P series")
    p.add_argument("series")
    p.add_argument("--t-a", type=float, default=None, help="asymptotic onset time (default: from the JSON sidecar)")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("table1", help="predicted vs fitted decay exponents")
    p.add_argument("--max-n", type=int, default=2, choices=[1, 2, 3, 4])
    p.add_argument("--symbolic", action="store_true", help="skip the numerical fits")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("frames", help="density snapshots as x,re,im,density CSV")
    p.add_argument("--eta", required=True, type=as_robin)
    p.add_argument("--times", required=True, type=_times)
    p.add_argument("--q", type=float, default=0.6)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--density", type=int, default=2000, help="grid points per unit length")
    p.add_argument("--outdir", default="frames")
    p.set_defaults(func=cmd_frames)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, QuadratureError, ValueError, OSError) as exc:
        print(f"escape: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
