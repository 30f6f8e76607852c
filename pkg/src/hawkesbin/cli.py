"""Command-line interface: ``hawkesbin {simulate,fit,gof,spectrum,experiment}``.

Every command writes a JSON report to stdout (or ``--out``); plottable
curves go to CSV side-files given with ``--csv``. ``simulate`` writes its
counts as CSV to ``--csv`` or, if that is absent, to stdout. Failures print
``{"error": {"type": ..., "message": ...}}`` and exit with status 1.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .experiments import StudyConfig, default_threads, run_study
from .gof import gof_test
from .io import dump_json, format_columns_csv, format_counts_csv, load_counts, package_version
from .kernels import parse_kernel
from .params import ModelFamily
from .periodogram import compute_periodogram
from .simulation import DEFAULT_BURNIN, HawkesModel, bin_counts, simulate
from .spectral import binned_spectral_density
from .whittle import fit, parametric_bootstrap

__all__ = ["main", "build_parser", "run_command"]


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _assignments(items, what):
    out = {}
    for item in items or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"{what} must look like name=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _bounds(items):
    out = {}
    for k, v in _assignments(items, "--bound").items():
        lo, sep, hi = v.partition(":")
        if not sep:
            raise UsageError(f"--bound {k} must look like name=lo:hi")
        out[k] = (float(lo), float(hi))
    return out


def _inits(items):
    return {k: float(v) for k, v in _assignments(items, "--init").items()}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default from HAWKESBIN_THREADS, else 1)")

    data = _Parser(add_help=False)
    data.add_argument("--input", required=True, help="count CSV (label,count or a single column)")
    data.add_argument("--delta", type=float, required=True, help="bin width in physical time units")
    data.add_argument("--fill-gaps", action="store_true", help="zero-fill missing bins")

    model_fit = _Parser(add_help=False)
    model_fit.add_argument("--kernel", required=True,
                           help="kernel family, optionally with fixed values, e.g. 'powerlaw:a=1.5'")
    model_fit.add_argument("--init", action="append", metavar="NAME=VALUE", help="starting value")
    model_fit.add_argument("--bound", action="append", metavar="NAME=LO:HI", help="box constraint")
    model_fit.add_argument("--coordinates", choices=["transformed", "raw"], default="transformed")
    model_fit.add_argument("--multistart", action="store_true")

    p = _Parser(prog="hawkesbin", description="Hawkes processes from bin counts.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate and bin a Hawkes process")
    s.add_argument("--kernel", required=True, help="kernel with parameters, e.g. 'exp:beta=1'")
    s.add_argument("--eta", type=float, required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--burnin", type=float, default=DEFAULT_BURNIN)
    s.add_argument("--csv", help="counts CSV path (default stdout)")

    f = sub.add_parser("fit", parents=[common, data, model_fit], help="Whittle estimate from counts")
    f.add_argument("--bootstrap", type=int, default=0, metavar="B",
                   help="parametric-bootstrap covariance with B replicates")
    f.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gof", parents=[common, data, model_fit], help="spectral goodness-of-fit test")
    g.add_argument("--bandwidth", type=float, action="append", help="repeatable (default 0.05 and 0.10)")
    g.add_argument("--bootstrap", type=int, default=0, metavar="B", help="bootstrap replicates (>= 100)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--csv", help="Q^2 curve CSV (bandwidth, omega, q2)")

    sp = sub.add_parser("spectrum", parents=[common], help="periodogram and/or model spectral density")
    sp.add_argument("--input", help="count CSV; adds the periodogram")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--fill-gaps", action="store_true")
    sp.add_argument("--kernel", help="kernel with parameters; adds the model density")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--points", type=int, default=512, help="grid size on [0, pi] without --input")
    sp.add_argument("--csv", help="curve CSV (omega, periodogram and/or density)")

    e = sub.add_parser("experiment", parents=[common], help="Monte Carlo MSE study")
    e.add_argument("--config", required=True, help="JSON study configuration")
    e.add_argument("--csv", help="MSE table CSV")
    return p


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _fit_args(args):
    return dict(family=ModelFamily.parse(args.kernel), init=_inits(args.init) or None,
                bounds=_bounds(args.bound) or None, coordinates=args.coordinates,
                multistart=args.multistart)


def _fit_series(series, opts):
    init = opts["init"]
    family = opts["family"]
    if init is not None:
        missing = set(family.names) - set(init)
        if missing:
            raise UsageError(f"--init must give all of {list(family.names)}; missing {sorted(missing)}")
    return fit(series, family, init=init, bounds=opts["bounds"],
               coordinates=opts["coordinates"], multistart=opts["multistart"])


def _cmd_simulate(args):
    model = HawkesModel(args.eta, args.mu, parse_kernel(args.kernel))
    real = simulate(model, args.T, burnin=args.burnin, rng=np.random.default_rng(args.seed))
    series = bin_counts(real, args.delta)
    csv_text = format_counts_csv(series.counts, {"delta": args.delta, "T": args.T, "seed": args.seed})
    if args.csv:
        _write(args.csv, csv_text)
    else:
        sys.stdout.write(csv_text)
    result = {"n_bins": series.n, "n_events": len(real.times), "total_count": int(series.counts.sum()),
              "discarded": series.discarded, "kernel": model.kernel.spec(), "stationary": model.stationary}
    # the report goes to stdout only when the counts do not
    return result, bool(args.csv) or bool(args.out)


def _cmd_fit(args):
    series = load_counts(args.input, args.delta, args.fill_gaps)
    res = _fit_series(series, _fit_args(args))
    out = res.to_dict()
    if args.bootstrap:
        boot = parametric_bootstrap(res, B=args.bootstrap, seed=args.seed)
        cov = boot["covariance"]
        out["bootstrap"] = {"B": args.bootstrap, "failures": boot["failures"],
                            "covariance": None if cov is None else np.atleast_2d(cov),
                            "std_errors": None if cov is None else np.sqrt(np.diag(np.atleast_2d(cov)))}
    return out, True


def _cmd_gof(args):
    series = load_counts(args.input, args.delta, args.fill_gaps)
    res = _fit_series(series, _fit_args(args))
    if not res.converged:
        raise ArithmeticError(f"fit did not converge: {res.message}")
    pgram = compute_periodogram(series)
    reports, curves = [], []
    rng = np.random.default_rng(args.seed)
    for h in args.bandwidth or [0.05, 0.10]:
        rep = gof_test(pgram, res, h, B=args.bootstrap, rng=rng)
        reports.append(rep.to_dict())
        curves.append(np.column_stack([np.full(len(rep.q2_curve), h), rep.q2_curve]))
    if args.csv:
        c = np.vstack(curves)
        _write(args.csv, format_columns_csv({"bandwidth": c[:, 0], "omega": c[:, 1], "q2": c[:, 2]}))
    return {"fit": res.to_dict(), "gof": reports}, True


def _cmd_spectrum(args):
    cols = {}
    if args.input:
        series = load_counts(args.input, args.delta, args.fill_gaps)
        pg = compute_periodogram(series)
        half = pg.half
        cols["omega"] = pg.frequencies[half]
        cols["periodogram"] = pg.ordinates[half]
    else:
        cols["omega"] = np.linspace(0.0, np.pi, args.points)
    if args.kernel:
        if args.eta is None or args.mu is None:
            raise UsageError("--kernel needs --eta and --mu")
        model = HawkesModel(args.eta, args.mu, parse_kernel(args.kernel))
        cols["density"] = binned_spectral_density(model, args.delta, cols["omega"])
    if len(cols) == 1:
        raise UsageError("give --input, --kernel, or both")
    if args.csv:
        _write(args.csv, format_columns_csv(cols, {"delta": args.delta}))
    summary = {"n_points": len(cols["omega"]), "columns": list(cols)}
    if "density" in cols:
        summary["density_range"] = [float(np.min(cols["density"])), float(np.max(cols["density"]))]
    return summary, True


def _cmd_experiment(args):
    config = StudyConfig.from_file(args.config)
    threads = default_threads() if args.threads is None else args.threads
    table = run_study(config, threads=threads)
    if args.csv:
        _write(args.csv, table.to_csv())
    return {"study": config.to_dict(), **table.to_dict()}, True


COMMANDS = {"simulate": _cmd_simulate, "fit": _cmd_fit, "gof": _cmd_gof,
            "spectrum": _cmd_spectrum, "experiment": _cmd_experiment}


def _config_echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")}


def _execute(argv):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    result, emit = COMMANDS[args.command](args)
    report = {
        "command": args.command,
        "argv": list(argv),
        "config": _config_echo(args),
        "seed": getattr(args, "seed", None),
        "version": package_version(),
        "result": result,
        "timing": {"elapsed_seconds": time.perf_counter() - t0},
    }
    return report, emit, args.out


_FAILURES = (ValueError, OSError, KeyError, ArithmeticError, np.linalg.LinAlgError)


def _error(exc) -> dict:
    kind = "usage" if isinstance(exc, UsageError) else type(exc).__name__
    return {"error": {"type": kind, "message": str(exc)}}


def run_command(argv) -> tuple[dict, int]:
    """Run one command; returns ``(report, exit status)``. Side-files are still written."""
    try:
        report, _, _ = _execute(list(argv))
    except _FAILURES as exc:
        return _error(exc), 1
    return report, 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        report, emit, out = _execute(argv)
    except _FAILURES as exc:
        sys.stdout.write(dump_json(_error(exc)))
        return 1
    text = dump_json(report)
    if out:
        _write(out, text)
    elif emit:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
