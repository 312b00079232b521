"""Command-line front end.

Subcommands: theory, simulate, sweep, exact, dyn, validate.  Output is a
single JSON object ({"meta": ..., "rows": [...]}) or CSV with a one-line
`#` metadata header; the resolved configuration is always echoed into the
metadata so a run can be reproduced from its own output.  Exit codes:
0 ok, 1 usage error, 2 runtime error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict

from . import acceptance, dynamics, exact, markproc, montecarlo, theory
from .core import Params, ParamsError, validate as validate_params

_SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; spec wants 1
        raise UsageError(message)


def _count(text: str) -> int:
    """Integer, also accepted in scientific notation when exact (1e6 ok,
    1.5e0 not)."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        val = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}")
    if val != int(val):
        raise UsageError(f"{text!r} is not an exact integer")
    return int(val)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p: _Parser):
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=_count, default=0, help="master seed")
    p.add_argument("--workers", type=_count, default=1)


def _build_parser() -> _Parser:
    root = _Parser(prog="bootperc", description=__doc__)
    sub = root.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    pt = sub.add_parser("theory", help="threshold/limit quantities")
    pt.add_argument("--n", type=_count)
    pt.add_argument("--p", type=float)
    pt.add_argument("--a", type=_count)
    pt.add_argument("--r", type=_count, default=2)
    pt.add_argument("--c", type=float, help="scaled edge probability pn")
    pt.add_argument("--theta", type=float, default=0.0, help="scaled initial fraction a/n")
    _add_common(pt)

    ps = sub.add_parser("simulate", help="single trial")
    ps.add_argument("--n", type=_count, required=True)
    ps.add_argument("--p", type=float, required=True)
    ps.add_argument("--a", type=_count, required=True)
    ps.add_argument("--r", type=_count, default=2)
    ps.add_argument("--big-threshold", type=float, default=0.5)
    ps.add_argument("--engine", choices=("markproc", "graph"), default="markproc")
    ps.add_argument("--trajectory", action="store_true",
                    help="also emit the activation-time histogram rows")
    _add_common(ps)

    pw = sub.add_parser("sweep", help="batches across an axis")
    pw.add_argument("--n", type=_count, required=True)
    pw.add_argument("--p", type=float, required=True)
    pw.add_argument("--a", type=_count, required=True)
    pw.add_argument("--r", type=_count, default=2)
    pw.add_argument("--big-threshold", type=float, default=0.5)
    pw.add_argument("--engine", choices=("markproc", "graph"), default="markproc")
    pw.add_argument("--axis", choices=("a", "p"), required=True)
    pw.add_argument("--values", type=_floats, required=True,
                    help="comma-separated sweep values")
    pw.add_argument("--trials", type=_count, default=100)
    _add_common(pw)

    pe = sub.add_parser("exact", help="exact pmf of the stopping time")
    pe.add_argument("--n", type=_count, required=True)
    pe.add_argument("--p", type=float, required=True)
    pe.add_argument("--a", type=_count, required=True)
    pe.add_argument("--r", type=_count, default=2)
    _add_common(pe)

    pd = sub.add_parser("dyn", help="dynamical models")
    pd.add_argument("--model", choices=("activation", "infection", "edges"),
                    required=True)
    pd.add_argument("--n", type=_count, required=True)
    pd.add_argument("--p", type=float, help="edge probability (activation/infection)")
    pd.add_argument("--a", type=_count, help="initial actives (edges model)")
    pd.add_argument("--r", type=_count, default=2)
    pd.add_argument("--big-threshold", type=float, default=0.5)
    pd.add_argument("--engine", choices=("graph", "markproc"), default="graph")
    pd.add_argument("--trials", type=_count, default=1, help="number of seeds")
    _add_common(pd)

    pv = sub.add_parser("validate", help="run the acceptance suite")
    pv.add_argument("--quick", action="store_true",
                    help="reduced-size smoke profile")
    _add_common(pv)
    return root


def _apply_config(argv: list[str]) -> list[str]:
    """Prepend file-sourced key=value pairs as flags so CLI flags override."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    path = argv[i + 1]
    pairs: list[str] = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"bad config line: {line!r}")
                key, val = (x.strip() for x in line.split("=", 1))
                pairs += [f"--{key.replace('_', '-')}", val]
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    # insert right after the subcommand so explicit flags win
    return argv[:1] + pairs + argv[1:]


def _emit(meta: dict, rows: list[dict], fmt: str, out_path: str | None):
    meta = {"schema_version": _SCHEMA_VERSION, **meta}
    if fmt == "json":
        text = json.dumps({"meta": meta, "rows": rows}, indent=2,
                          default=float) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        if rows:
            fields = list(rows[0].keys())
            writer = csv.DictWriter(buf, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(args, **extra) -> dict:
    skip = {"cmd", "config", "func"}
    base = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    base.update(extra)
    return base


def _outcome_row(outcome) -> dict:
    row = asdict(outcome)
    row["generation_sizes"] = list(outcome.generation_sizes)
    return row


def cmd_theory(args) -> int:
    if args.c is not None:
        rep = theory.boundary_report(args.c, args.theta, args.r)
        rows = [asdict(rep)]
        rows[0]["roots"] = list(rep.roots)
        _emit(_meta(args), rows, args.format, args.out)
        return 0
    if args.n is None or (args.p is None and args.a is None):
        raise UsageError("theory needs --c, or --n with at least one of --p/--a")
    rep = theory.report(args.n, args.r, p=args.p, a=args.a)
    rows = [asdict(rep)]
    if args.p is not None and 0 < args.p < 1 and args.p * args.n <= 20:
        brep = theory.boundary_report(args.p * args.n,
                                      (args.a or 0) / args.n, args.r)
        brow = asdict(brep)
        brow["roots"] = list(brep.roots)
        rows.append(brow)
    _emit(_meta(args), rows, args.format, args.out)
    return 0


def cmd_simulate(args) -> int:
    params = validate_params(Params(args.n, args.p, args.a, args.r,
                                    args.big_threshold))
    outcome = montecarlo.run_one(params, args.seed, engine=args.engine)
    rows = [_outcome_row(outcome)]
    if args.trajectory:
        traj = markproc.trajectory(params, args.seed)
        nz = traj.counts.nonzero()[0]
        rows += [{"t": int(t), "count": int(traj.counts[t])} for t in nz]
        rows.append({"t": "never", "count": traj.never_count})
    _emit(_meta(args), rows, args.format, args.out)
    return 0


def cmd_sweep(args) -> int:
    params = validate_params(Params(args.n, args.p, args.a, args.r,
                                    args.big_threshold))
    table = montecarlo.sweep(params, args.axis, args.values, args.trials,
                             args.seed, engine=args.engine, workers=args.workers)
    rows = []
    for value, stats in table:
        row = {"value": value}
        row.update(stats.row())
        rows.append(row)
    _emit(_meta(args), rows, args.format, args.out)
    return 0


def cmd_exact(args) -> int:
    pmf = exact.exact_T_pmf(args.n, args.p, args.a, args.r)
    rows = [{"k": k, "probability": prob} for k, prob in pmf.to_csv_rows()]
    _emit(_meta(args, total=pmf.total), rows, args.format, args.out)
    return 0


def cmd_dyn(args) -> int:
    rows = []
    for i in range(args.trials):
        if args.model == "activation":
            if args.p is None:
                raise UsageError("activation model needs --p")
            out = dynamics.external_activation(args.n, args.p, args.r,
                                               args.big_threshold, args.seed,
                                               stream=i, engine=args.engine)
        elif args.model == "infection":
            if args.p is None:
                raise UsageError("infection model needs --p")
            out = dynamics.external_infection(args.n, args.p, args.r,
                                              args.big_threshold, args.seed,
                                              stream=i)
        else:
            if args.a is None:
                raise UsageError("edges model needs --a")
            out = dynamics.edge_addition(args.n, args.a, args.r,
                                         args.big_threshold, args.seed,
                                         stream=i)
        rows.append(asdict(out))
    _emit(_meta(args), rows, args.format, args.out)
    return 0


def cmd_validate(args) -> int:
    results = acceptance.run_criteria(quick=args.quick, workers=args.workers)
    rows = [asdict(r) for r in results]
    _emit(_meta(args), rows, args.format, args.out)
    return 0 if all(r.passed for r in results) else 3


_DISPATCH = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "exact": cmd_exact,
    "dyn": cmd_dyn,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config(argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _DISPATCH[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParamsError, ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    """console_scripts hook."""
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
