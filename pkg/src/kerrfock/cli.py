"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 resource
bound exceeded.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .experiments import (
    Level,
    PathChoice,
    SweepSpec,
    SweepVariable,
    distribution_report,
    phase_report,
    sweep,
    verify,
    visibility,
)
from .fock_core import ResourceBoundError
from .interferometer import BeamSplitter, InterferometerConfig, Port
from .reporting import (
    config_metadata,
    distribution_table,
    render,
    sweep_table,
    write_figures,
)
from .state_prep import KerrConvention

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--beta-mag", type=float, default=2.0, help="input amplitude |beta| (default 2)")
    g.add_argument("--theta", type=float, default=math.pi / 2,
                   help="relative phase in radians (default pi/2, the dark-port point)")
    g.add_argument("--gamma3", type=float, default=0.1, help="Kerr strength (default 0.1)")
    g.add_argument("--transmission", type=float, default=math.sqrt(0.5),
                   help="amplitude transmission t; r = sqrt(1 - t^2) (default 1/sqrt(2))")
    g.add_argument("--cutoff", type=int, default=0, help="input Fock cutoff, 0 = automatic")
    g.add_argument("--kerr-convention", choices=[c.value for c in KerrConvention],
                   default=KerrConvention.N_SQUARED.value)
    g.add_argument("--path", choices=[p.value for p in PathChoice], default="matrix")
    g.add_argument("--port", type=int, choices=(2, 3), default=3)
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", type=Path, default=None, help="output file (directory for figures)")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--seed", type=_u64, default=0, help="seed for randomized verification")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="kerrfock", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", parents=[common], help="photon-number distribution of one port")
    d.add_argument("--max-n", type=int, default=None, help="largest photon number (default 2*cutoff)")

    ph = sub.add_parser("phase-dist", parents=[common], help="phase distribution of one port")
    ph.add_argument("--points", type=int, default=256)

    for name, var, start, stop in (("sweep-theta", "theta", 0.0, 2 * math.pi),
                                   ("sweep-gamma", "gamma3", 0.0, 1.0)):
        s = sub.add_parser(name, parents=[common], help=f"sweep {var}")
        s.add_argument("--start", type=float, default=start)
        s.add_argument("--stop", type=float, default=stop)
        s.add_argument("--steps", type=int, default=64 if var == "theta" else 21)

    v = sub.add_parser("visibility", parents=[common], help="fringe visibility versus gamma3")
    v.add_argument("--gamma3-values", type=float, nargs="+", default=None,
                   help="explicit gamma3 grid (default: --gamma3 only)")
    v.add_argument("--points", type=int, default=128, help="theta points per fringe")

    ver = sub.add_parser("verify", parents=[common], help="run verification suites")
    ver.add_argument("--level", choices=[lv.value for lv in Level], default="quick")

    sub.add_parser("figures", parents=[common], help="write the figure data set into --out")
    return parser


def _config(args) -> InterferometerConfig:
    try:
        bs = BeamSplitter.from_transmission(args.transmission)
        return InterferometerConfig(args.beta_mag, args.theta, args.gamma3, bs,
                                    args.cutoff, KerrConvention(args.kerr_convention))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")


def _run(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    cfg = _config(args)
    path = PathChoice(args.path)
    meta = {**config_metadata(cfg), "path": path.value}

    if args.command == "dist":
        dist = distribution_report(Port(args.port), cfg, args.max_n, path)
        _emit(args, render(*distribution_table(dist), args.format, {**meta, **dist.metadata}))
        residual = dist.metadata.get("path_residual")
        if residual is not None and residual > 1e-6:
            print(f"path disagreement {residual:.3e}", file=sys.stderr)
            return EXIT_VERIFY
        return EXIT_OK

    if args.command == "phase-dist":
        dist = phase_report(Port(args.port), cfg, args.points)
        _emit(args, render(*distribution_table(dist, "phi"), args.format,
                           {**meta, **dist.metadata}))
        return EXIT_OK

    if args.command in ("sweep-theta", "sweep-gamma"):
        var = SweepVariable.THETA if args.command == "sweep-theta" else SweepVariable.GAMMA3
        try:
            spec = SweepSpec(var, args.start, args.stop, args.steps, cfg, path)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows = sweep(spec, workers=args.workers)
        both = path is PathChoice.BOTH
        _emit(args, render(*sweep_table(rows, var, both), args.format,
                           {**meta, "variable": var.value, "steps": args.steps}))
        bad = [r for r in rows if not (r.conserved and r.paths_agree)]
        for r in bad:
            print(f"verification failure at {var.value}={r.value!r}: total_mean={r.total_mean!r}"
                  f" expected {r.expected_total!r}, path_residual={r.path_residual!r}",
                  file=sys.stderr)
        return EXIT_VERIFY if bad else EXIT_OK

    if args.command == "visibility":
        grid = args.gamma3_values or [args.gamma3]
        rows = [(g, visibility(g, cfg, args.points, args.workers)) for g in grid]
        _emit(args, render(("gamma3", "visibility"), rows, args.format,
                           {**meta, "theta_points": args.points}))
        return EXIT_OK

    if args.command == "verify":
        report = verify(Level(args.level), seed=args.seed, workers=args.workers)
        rows = [(c.name, int(c.passed), c.residual, c.tolerance) for c in report.checks]
        _emit(args, render(("check", "passed", "residual", "tolerance"), rows, args.format,
                           {"level": report.level.value, "seed": args.seed,
                            "passed": int(report.passed)}))
        return EXIT_OK if report.passed else EXIT_VERIFY

    if args.command == "figures":
        if args.out is None:
            raise UsageError("figures needs --out <directory>")
        for p in write_figures(args.out, args.workers, args.format):
            print(p)
        return EXIT_OK

    raise UsageError(f"unknown command {args.command}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except UsageError as exc:
        print(f"kerrfock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceBoundError as exc:
        print(f"kerrfock: resource bound exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
