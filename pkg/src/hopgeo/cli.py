"""``hopgeo`` command line: ``simulate``, ``kappa`` and ``verify``.

Exit codes are 0 on success, 1 for configuration or usage errors and 2 for
numerical or verification failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as config_mod
from .compressibility import kappa_report
from .dynamics import FLOAT_FMT, TerminationReason, find_steady_state, integrate
from .errors import ConfigError, HopgeoError, NumericalError
from .models import GeneralizedHopfield
from .verify import DEFAULT_SEED, SUITES, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2
KAPPA_REL_TOL = 1e-4


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the config-error code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def default_jobs():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=_positive_int, default=argparse.SUPPRESS, help="worker threads (default: available CPUs)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override seeds of random initial conditions, point sets and suites")

    parser = _Parser(prog="hopgeo", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", parents=[common], help="integrate every initial condition of a config")
    sim.add_argument("config")

    kap = sub.add_parser("kappa", parents=[common], help="compressibility by all three routes at a set of points")
    kap.add_argument("config")
    kap.add_argument("--points", help="random:k:seed, grid[:lo:hi:m] or a JSON/CSV file (default: the config's initial conditions)")
    kap.add_argument("--at-steady", action="store_true", help="integrate each point to its steady state first")
    kap.add_argument("--output", "-o", help="write rows here instead of stdout")
    kap.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    ver = sub.add_parser("verify", parents=[common], help="run the seeded property suites")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    return parser


def _fmt(x):
    return FLOAT_FMT.format(float(x))


def _simulate_one(model, U0, cfg, path, fmt):
    record = integrate(model, U0, cfg)
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            record.write_csv(fh)
        else:
            record.write_jsonl(fh)
    return record


def cmd_simulate(args):
    cfg = config_mod.load(args.config)
    model = cfg.build_model()
    icfg = cfg.integrator_config()
    points = cfg.initial_points(args.seed)
    fmt = cfg.outputs["format"]
    out_dir = cfg.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"trajectory_{i:03d}.{fmt}" for i in range(len(points))]

    def run(i):
        try:
            return _simulate_one(model, points[i], icfg, paths[i], fmt), None
        except NumericalError as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(run, range(len(points))))

    code = EXIT_OK
    for path, (record, exc) in zip(paths, results):
        if exc is not None:
            print(f"{path.name}: NumericalFailure ({exc})")
            code = EXIT_FAILURE
            continue
        line = f"{path.name}: {record.termination_reason.value}, {len(record)} rows, t = {_fmt(record.t[-1])}"
        if record.termination_reason is TerminationReason.NUMERICAL_FAILURE:
            line += f", failure at step {record.failure_step}"
            code = EXIT_FAILURE
        print(line)
    return code


def _kappa_points(args, cfg):
    if args.points:
        box = cfg.initial_conditions.get("box", (-3.0, 3.0)) if isinstance(cfg.initial_conditions, dict) else (-3.0, 3.0)
        return config_mod.parse_points(args.points, cfg.dimension, box, args.seed)
    return cfg.initial_points(args.seed)


def cmd_kappa(args):
    cfg = config_mod.load(args.config)
    model = cfg.build_model()
    if not isinstance(model, GeneralizedHopfield):
        raise ConfigError("kappa needs a metric-gradient model (hopfield or gradient); cohen_grossberg is not supported")
    points = _kappa_points(args, cfg)

    def run(U):
        if args.at_steady:
            U, _ = find_steady_state(model, U)
        return kappa_report(model.energy, model.sp, U)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        reports = list(pool.map(run, points))

    n = cfg.dimension
    header = [f"U_{i}" for i in range(1, n + 1)] + ["kappa_closed_form", "kappa_laplacian", "kappa_divergence", "max_pairwise_residual"]
    lines = []
    if args.format == "csv":
        lines.append(",".join(header))
    for rep in reports:
        values = [*rep.point_U, *rep.values(), rep.max_pairwise_residual]
        if args.format == "csv":
            lines.append(",".join(_fmt(v) for v in values))
        else:
            lines.append("{" + ",".join(f"{json.dumps(k)}:{_fmt(v)}" for k, v in zip(header, values)) + "}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    bad = [r for r in reports if not r.within_tolerance(KAPPA_REL_TOL)]
    for r in bad:
        print(f"route disagreement at U = {np.asarray(r.point_U).tolist()}: residual {r.max_pairwise_residual:.3e}", file=sys.stderr)
    return EXIT_FAILURE if bad else EXIT_OK


def cmd_verify(args):
    checks = run_suite(args.suite, DEFAULT_SEED if args.seed is None else args.seed)
    print(f"{'':4}  {'check':<48} {'measured':>12}    tolerance")
    for c in checks:
        print(c.row())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} passed")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


COMMANDS = {"simulate": cmd_simulate, "kappa": cmd_kappa, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.jobs = getattr(args, "jobs", None) or default_jobs()
    args.seed = getattr(args, "seed", None)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"hopgeo: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HopgeoError as exc:
        print(f"hopgeo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
