"""Command line front end.

Commands::

    cvinfer ci        INPUT [--method ...] [--level 0.95] [--draws N] [--seed S]
    cvinfer test      INPUT --tau0 T [--method ...]
    cvinfer simulate  (--scenario FILE | --builtin table1 ...) [--reps R] [--out FILE]
    cvinfer fixtures  [--dir DIR]

INPUT is a CSV path or ``-`` for stdin, either long raw data (``group,value``)
or one summary row per group (``group,n,mean,sd``).

Exit codes: 0 success, 2 bad input or usage, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from . import datasets, gpv, model, mslr, sim
from .errors import CVInferError, DataError, NumericalError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_NUMERIC = 3

RAW_HEADER = ["group", "value"]
SUMMARY_HEADER = ["group", "n", "mean", "sd"]
ALL = ("mslr", "slr", "gv1", "gv2", "gv3")


class InputError(DataError):
    pass


def read_dataset(source, kind="auto"):
    """Parse a raw-long or summary-wide CSV into a :class:`Dataset`."""
    if source == "-":
        text = sys.stdin.read()
    else:
        path = Path(source)
        if not path.is_file():
            raise InputError(f"input file not found: {source}")
        text = path.read_text()
    return parse_dataset(text, kind)


def parse_dataset(text, kind="auto"):
    rows = list(csv.reader(io.StringIO(text)))
    numbered = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not numbered:
        raise InputError("input is empty")
    lineno, header = numbered[0]
    header = [c.strip().lower() for c in header]
    if kind == "auto":
        if header == RAW_HEADER:
            kind = "raw"
        elif header == SUMMARY_HEADER:
            kind = "summary"
        else:
            raise InputError(
                f"line {lineno}: header must be 'group,value' or 'group,n,mean,sd', "
                f"got {','.join(header)!r}")
    expected = RAW_HEADER if kind == "raw" else SUMMARY_HEADER
    if header != expected:
        raise InputError(f"line {lineno}: expected header {','.join(expected)!r}")

    groups = {}
    for lineno, row in numbered[1:]:
        row = [c.strip() for c in row]
        if len(row) != len(expected):
            raise InputError(f"line {lineno}: expected {len(expected)} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value in {row[1:]!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"line {lineno}: non-finite value")
        if kind == "raw":
            groups.setdefault(row[0], []).append(vals[0])
        else:
            if row[0] in groups:
                raise InputError(f"line {lineno}: duplicate group {row[0]!r}")
            if vals[0] != int(vals[0]):
                raise InputError(f"line {lineno}: n must be an integer")
            groups[row[0]] = vals
    if not groups:
        raise InputError("input has no data rows")
    if kind == "raw":
        return model.Dataset.from_groups(list(groups.values())), list(groups)
    n, mean, sd = zip(*groups.values())
    return model.Dataset.from_summaries([int(v) for v in n], mean, sd), list(groups)


def _default_seed():
    env = os.environ.get("CVINFER_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"CVINFER_SEED must be an integer, got {env!r}") from None


def _methods(arg):
    out = []
    for m in arg:
        out += list(ALL) if m == "all" else [m]
    return list(dict.fromkeys(out))


def _level(value):
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def compute_intervals(data, methods, level, cfg):
    out = []
    fit = model.fit_mle(data) if {"mslr", "slr"} & set(methods) else None
    gv = [m.upper() for m in methods if m.startswith("gv")]
    gv_cis = gpv.gpv_cis(data, level, cfg, gv) if gv else {}
    for m in methods:
        if m == "mslr":
            out.append(mslr.ci_mslr(data, level, fit))
        elif m == "slr":
            out.append(mslr.ci_slr(data, level, fit))
        else:
            out.append(gv_cis[m.upper()])
    return fit, out


def compute_pvalues(data, methods, tau0, cfg):
    out = {}
    fit = model.fit_mle(data) if {"mslr", "slr"} & set(methods) else None
    gv = [m.upper() for m in methods if m.startswith("gv")]
    samples = gpv.pivotal_samples(data, cfg, gv) if gv else {}
    for m in methods:
        if m == "mslr":
            out["MSLR"] = mslr.pvalue_mslr(data, tau0, fit)
        elif m == "slr":
            out["SLR"] = mslr.pvalue_slr(data, tau0, fit)
        else:
            out[m.upper()] = gpv.generalized_pvalue(samples[m.upper()].values, tau0)
    return fit, out


def _render_intervals(fit, intervals, fmt, out):
    if fmt == "json":
        doc = {"tau_hat": fit.tau_hat if fit else None,
               "intervals": [{"method": e.method, "level": e.level, "lower": e.lower,
                              "upper": e.upper, "length": e.length,
                              "diagnostics": _jsonable(e.diagnostics)} for e in intervals]}
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "level", "lower", "upper", "length", "tau_hat",
                    "mc_stderr_lower", "mc_stderr_upper"])
        for e in intervals:
            se = e.diagnostics.get("mc_stderr", ("", ""))
            w.writerow([e.method, e.level, f"{e.lower:.10g}", f"{e.upper:.10g}",
                        f"{e.length:.10g}", f"{fit.tau_hat:.10g}" if fit else "",
                        *(f"{s:.3g}" if s != "" else "" for s in se)])
        return
    if fit is not None:
        out.write(f"tau_hat = {fit.tau_hat:.6f}  (profile MLE, {fit.iterations} iterations)\n")
    for e in intervals:
        line = f"{e.method:<5} {100 * e.level:g}% CI  ({e.lower:.4f}, {e.upper:.4f})  length {e.length:.4f}"
        if "mc_stderr" in e.diagnostics:
            lo, hi = e.diagnostics["mc_stderr"]
            line += f"  MC stderr ({lo:.2g}, {hi:.2g})"
        out.write(line + "\n")


def _jsonable(d):
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def cmd_ci(args, out):
    data, _ = read_dataset(args.input, args.kind)
    cfg = gpv.PivotalConfig(args.draws, args.gv1_variant, args.seed)
    fit, intervals = compute_intervals(data, _methods(args.method), args.level, cfg)
    _render_intervals(fit, intervals, args.format, out)
    return EXIT_OK


def cmd_test(args, out):
    if not args.tau0 > 0:
        raise InputError(f"--tau0 must be positive, got {args.tau0!r}")
    data, _ = read_dataset(args.input, args.kind)
    cfg = gpv.PivotalConfig(args.draws, args.gv1_variant, args.seed)
    fit, pvals = compute_pvalues(data, _methods(args.method), args.tau0, cfg)
    if args.format == "json":
        out.write(json.dumps({"tau0": args.tau0, "tau_hat": fit.tau_hat if fit else None,
                              "p_values": pvals}, indent=2) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["method", "tau0", "p_value"])
        for m, p in pvals.items():
            w.writerow([m, args.tau0, f"{p:.10g}"])
    else:
        if fit is not None:
            out.write(f"tau_hat = {fit.tau_hat:.6f}\n")
        for m, p in pvals.items():
            out.write(f"{m:<5} H0: tau = {args.tau0:g}  two-sided p = {p:.4g}\n")
    return EXIT_OK


def cmd_simulate(args, out):
    if args.scenario:
        path = Path(args.scenario)
        if not path.is_file():
            raise InputError(f"scenario file not found: {args.scenario}")
        scenarios = sim.load_scenarios(path)
    else:
        names = set(args.builtin)
        tables = None if "all" in names else names
        unknown = names - set(sim.TABLES.values()) - {"all"}
        if unknown:
            raise InputError(f"unknown builtin tables: {sorted(unknown)}")
        scenarios = sim.builtin_scenarios(tables=tables)
    changes = {}
    if args.reps is not None:
        changes["reps"] = args.reps
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.draws is not None:
        changes["gpv_draws"] = args.draws
    if args.methods:
        changes["methods"] = tuple(m.upper() for m in _methods(args.methods))
    if changes:
        scenarios = [s.with_(**changes) for s in scenarios]

    results = []
    executor = None
    try:
        if args.threads > 1:
            from concurrent.futures import ProcessPoolExecutor
            executor = ProcessPoolExecutor(args.threads)
        for i, sc in enumerate(scenarios, 1):
            sim.progress(f"[{i}/{len(scenarios)}] {sc.family} n={','.join(map(str, sc.n))} "
                         f"tau={sc.tau:g} reps={sc.reps}")
            results.append((sc, sim.run_study(sc, args.threads, executor)))
    finally:
        if executor is not None:
            executor.shutdown()
    text = sim.emit_table(results, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_fixtures(args, out):
    d = Path(args.dir)
    d.mkdir(parents=True, exist_ok=True)
    files = {"hospital.csv": datasets.hospital_csv()}
    files.update({f"blood_{m}.csv": datasets.blood_csv(m) for m in datasets.BLOOD})
    for name, text in files.items():
        (d / name).write_bytes(text.encode())
        sim.progress(f"wrote {d / name}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="cvinfer",
        description="Confidence intervals and tests for the common coefficient of variation "
                    "of several normal populations.")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp):
        sp.add_argument("input", help="CSV file ('group,value' or 'group,n,mean,sd'); '-' for stdin")
        sp.add_argument("--kind", choices=("auto", "raw", "summary"), default="auto")
        sp.add_argument("--method", nargs="+", choices=ALL + ("all",), default=["all"])
        sp.add_argument("--draws", type=int, default=100_000, help="pivotal draws for GV methods")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for GV draws (default: $CVINFER_SEED or 0)")
        sp.add_argument("--gv1-variant", choices=[v.value for v in gpv.GV1Variant],
                        default=gpv.GV1Variant.SQRT_N.value)
        sp.add_argument("--format", choices=("text", "csv", "json"), default="text")

    ci = sub.add_parser("ci", help="confidence intervals")
    data_args(ci)
    ci.add_argument("--level", type=_level, default=0.95)
    ci.set_defaults(func=cmd_ci)

    t = sub.add_parser("test", help="two-sided test of H0: tau = tau0")
    data_args(t)
    t.add_argument("--tau0", type=float, required=True)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="coverage / expected length study")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="JSON scenario file (schema_version 1)")
    src.add_argument("--builtin", nargs="+", metavar="TABLE",
                     help="built-in design: table1 ... table6 or all")
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--draws", type=int, help="pivotal draws per replication")
    s.add_argument("--methods", nargs="+", choices=ALL + ("all",))
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--format", choices=("csv", "markdown"), default="csv")
    s.add_argument("--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fixtures", help="write the bundled example CSV files")
    f.add_argument("--dir", default=".")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_DATA
    try:
        if getattr(args, "seed", 0) is None and args.command in ("ci", "test"):
            args.seed = _default_seed()
        return args.func(args, out)
    except DataError as exc:
        print(f"cvinfer: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"cvinfer: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CVInferError as exc:
        print(f"cvinfer: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
