"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 numerical
degeneracy that makes the whole run meaningless.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .exceptions import DataValidationError

log = logging.getLogger("acscreen")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "ACSCREEN_THREADS"


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a number > 0, got {v}")
    return v


def _int_list(s):
    try:
        vals = [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {s!r}")
    return vals


def _measure_list(s):
    from .measures import MEASURES

    names = [v.strip() for v in s.split(",") if v.strip()]
    bad = [n for n in names if n not in MEASURES]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown measure(s) {bad}; choose from {', '.join(sorted(MEASURES))}"
        )
    return names


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or all cores)")
    p.add_argument("--output", required=True, type=Path, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    from .measures import MEASURES

    measures = sorted(MEASURES)
    parser = _Parser(prog="acscreen", description="Distributed feature screening")
    parser.add_argument("--version", action="version", version=f"acscreen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("screen", help="screen the features of a CSV table")
    s.add_argument("--input", required=True, type=Path)
    s.add_argument("--response", required=True, help="response column name or 0-based index")
    s.add_argument("--measure", required=True, choices=measures)
    s.add_argument("--m", type=_positive_int, default=1, help="number of segments")
    rule = s.add_mutually_exclusive_group(required=True)
    rule.add_argument("--gamma", type=_positive_float)
    rule.add_argument("--top-k", type=_positive_int)
    s.add_argument("--method", choices=("acs", "sas", "racs", "centralized"), default="acs")
    s.add_argument("--R", type=_positive_int, default=3, help="partitions for racs")
    s.add_argument("--mode", choices=("random", "contiguous"), default="random")
    s.add_argument("--standardize", action="store_true",
                   help="standardize features first (always on for sirs)")
    s.add_argument("--sas-local", choices=("u", "v"), default="u",
                   help="local estimator for sas: U-statistic plug-in or classic V-statistic")
    s.add_argument("--naive", action="store_true", help="enumerate U-statistics (slow)")
    s.add_argument("--dump-components", action="store_true",
                   help="also write the component table as JSON")
    s.add_argument("--no-timing", action="store_true",
                   help="leave timings out of the manifest so reruns are byte-identical")
    _common(s)

    m = sub.add_parser("simulate", help="screening accuracy on a synthetic model")
    m.add_argument("--model", required=True, choices=tuple("abcdef"))
    m.add_argument("--N", type=_positive_int)
    m.add_argument("--p", type=_positive_int)
    m.add_argument("--m", type=_positive_int)
    m.add_argument("--T", type=_positive_int)
    m.add_argument("--measure", required=True, choices=measures)
    m.add_argument("--rho", type=_positive_float, default=0.8)
    m.add_argument("--top-k", type=_positive_int, default=None)
    m.add_argument("--method", choices=("sas", "acs", "racs", "all"), default="all")
    m.add_argument("--R", type=_positive_int, default=3)
    m.add_argument("--sas-local", choices=("u", "v"), default="u")
    m.add_argument("--full", action="store_true", help="paper-scale N, p, m and T")
    m.add_argument("--no-timing", action="store_true",
                   help="write NA for timings so reruns are byte-identical")
    _common(m)

    r = sub.add_parser("rmse-bench", help="estimator RMSE under independence")
    r.add_argument("--N", type=_positive_int, default=2700)
    r.add_argument("--m-list", type=_int_list, default=[45, 90, 180])
    r.add_argument("--T", type=_positive_int, default=500)
    r.add_argument("--measures", type=_measure_list, default=["kendall", "sirs", "dc"])
    r.add_argument("--R", type=_positive_int, default=3)
    r.add_argument("--sas-local", choices=("u", "v"), default="u")
    r.add_argument("--no-timing", action="store_true")
    _common(r)
    return parser


def _set_threads(n):
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return
        try:
            n = _positive_int(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"${THREADS_ENV}: {exc}") from None
    import numba

    if n > numba.config.NUMBA_NUM_THREADS:
        raise UsageError(
            f"--threads {n} exceeds the {numba.config.NUMBA_NUM_THREADS} threads numba was "
            "started with (set NUMBA_NUM_THREADS)"
        )
    numba.set_num_threads(n)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write(path: Path, text: str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _csv_text(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _manifest(args, outdir: Path, outputs, timings, input_digest=None):
    flags = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("verbose",)
    }
    doc = {
        "command": args.command,
        "flags": flags,
        "seed": args.seed,
        "version": __version__,
        "input_sha256": input_digest,
        "outputs": {name: _sha256(outdir / name) for name in outputs},
        "timings_seconds": None if args.no_timing else timings,
    }
    _write(outdir / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_screen(args) -> int:
    from .aggregation import estimate
    from .data import load_csv, partition, standardize
    from .kernels import component_table
    from .measures import builtin_measure
    from .screening import threshold_screen, top_k_screen

    t_start = time.perf_counter()
    ds = load_csv(args.input, args.response)
    spec = builtin_measure(args.measure)
    if args.m > ds.n_rows:
        raise DataValidationError(f"--m {args.m} exceeds the number of rows N = {ds.n_rows}")
    if args.top_k is not None and args.top_k > ds.n_features:
        raise UsageError(f"--top-k {args.top_k} exceeds the number of features {ds.n_features}")
    if args.standardize or spec.requires_standardized_features:
        ds, _ = standardize(ds)
    t_load = time.perf_counter() - t_start

    t0 = time.perf_counter()
    est = estimate(ds, spec, args.method, args.m, args.seed, args.R, args.mode, args.naive,
                   args.sas_local)
    t_est = time.perf_counter() - t0
    if est.degenerate.all():
        raise NumericalFailure("every feature has a degenerate estimate")
    res = threshold_screen(est, args.gamma) if args.gamma is not None else top_k_screen(est, args.top_k)

    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "estimates.csv", est.to_csv())
    rows = [dict(index=j, feature=est.feature_names[j], estimate=float(est.values[j]))
            for j in res.retained]
    _write(out / "retained.csv", _csv_text(["index", "feature", "estimate"], rows))
    outputs = ["estimates.csv", "retained.csv"]
    if args.dump_components:
        m = 1 if args.method == "centralized" else args.m
        part = partition(ds, m, seed=args.seed, mode=args.mode)
        table = component_table(ds, part, spec, naive=args.naive)
        _write(out / "components.json", table.to_json(indent=1, sort_keys=False) + "\n")
        outputs.append("components.json")
    n_bad = int(est.degenerate.sum())
    if n_bad:
        log.warning("%d feature(s) flagged degenerate; see the flag column", n_bad)
    _manifest(args, out, outputs,
              {"load": t_load, "estimate": t_est, "total": time.perf_counter() - t_start},
              _sha256(args.input))
    print(f"retained {len(res.retained)} of {est.p} features (gamma={res.gamma!r})")
    return EXIT_OK


METRIC_COLUMNS = ["model", "N", "p", "m", "measure", "method", "rho", "SSR", "MS", "Std(MS)",
                  "PSR", "FDR", "Time^n", "Time^N"]


def cmd_simulate(args) -> int:
    from .simbench import DESK_CONFIGS, PAPER_CONFIGS, SimConfig, run_screening_experiment

    base = (PAPER_CONFIGS if args.full else DESK_CONFIGS)[args.model]
    methods = ("sas", "acs", "racs") if args.method == "all" else (args.method,)
    try:
        cfg = SimConfig(
            model=args.model,
            N=args.N or base["N"],
            p=args.p or base["p"],
            m=args.m or base["m"],
            T=args.T or base["T"],
            measure=args.measure,
            rho=args.rho,
            R=args.R,
            seed=args.seed,
            methods=methods,
            top_k=args.top_k,
            sas_local=args.sas_local,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.rho > 1:
        raise UsageError("--rho must be in (0, 1]")

    t0 = time.perf_counter()
    outcome = run_screening_experiment(cfg)
    wall = time.perf_counter() - t0
    if not outcome.reports:
        raise NumericalFailure("every repetition was skipped: " + "; ".join(
            msg for _, msg in outcome.skipped[:3]))
    rows = []
    for row in outcome.rows():
        row.update(N=cfg.N, p=cfg.p, rho=cfg.rho if cfg.top_k is None else "top-%d" % cfg.top_k)
        if args.no_timing:
            row["Time^n"] = row["Time^N"] = "NA"
        rows.append(row)

    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "metrics.csv", _csv_text(METRIC_COLUMNS, rows))
    raw = {k: json.loads(v.to_json()) for k, v in outcome.reports.items()}
    raw["skipped"] = [list(s) for s in outcome.skipped]
    _write(out / "metrics.json", json.dumps(raw, sort_keys=True) + "\n")
    _manifest(args, out, ["metrics.csv", "metrics.json"], {"total": wall})
    for row in rows:
        print(", ".join(f"{c}={_fmt(row[c])}" for c in METRIC_COLUMNS[5:12]))
    return EXIT_OK


def cmd_rmse_bench(args) -> int:
    from .simbench import run_rmse_experiment

    bad = [m for m in args.m_list if m > args.N]
    if bad:
        raise DataValidationError(f"m values {bad} exceed N = {args.N}")
    t0 = time.perf_counter()
    res = run_rmse_experiment(args.N, args.m_list, args.T, args.measures, args.seed, args.R,
                              args.sas_local)
    wall = time.perf_counter() - t0
    order = {"SA": 0, "AC": 1, "rAC": 2}
    rows = sorted(res.rows, key=lambda r: (args.measures.index(r["measure"]), order[r["method"]], r["m"]))
    if args.no_timing:
        for r in rows:
            r["time"] = "NA"
    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "rmse.csv", _csv_text(["measure", "method", "m", "RMSE", "SE", "time"], rows))
    _manifest(args, out, ["rmse.csv"], {"total": wall})
    for r in rows:
        print(f"{r['measure']:>8} {r['method']:>4} m={r['m']:<4} RMSE={r['RMSE']:.3e}")
    return EXIT_OK


COMMANDS = {"screen": cmd_screen, "simulate": cmd_simulate, "rmse-bench": cmd_rmse_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _set_threads(args.threads)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataValidationError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
