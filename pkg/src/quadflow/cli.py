"""Command-line interface: ``quadflow analyze | decay | verify``.

Exit codes: 0 success, 1 failed verification check, 2 invalid or
non-dissipative model, 3 split requested but the singular space is not
symplectic, 4 non-diagonalizable dissipative part, 5 decay rate outside
--rate-tol.
"""

import argparse
import json
import os
import re
import sys
import warnings

import numpy as np

from . import acceptance
from .analysis import NONSYMPLECTIC, analyze
from .errors import QuadflowError
from .form import MODEL_NAMES, ModelWarning, builtin, load_model
from .gabor.verify import fractional_exponent, schur_bound, verify_decay
from .report import build_report, fmt, format_table, verification_summary, write_csv

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NONSYMPLECTIC, EXIT_NONDIAG, EXIT_RATE = 0, 1, 2, 3, 4, 5


class CliExit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _model_args(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", choices=[m for m in MODEL_NAMES if m != "custom"], help="built-in model")
    src.add_argument("--file", help="model file (.json or .toml)")
    p.add_argument("--d", type=int, help="dimension for hermite/twisted")
    p.add_argument("--d1", type=int, help="dissipative dimension for mixed")
    p.add_argument("--d2", type=int, help="dispersive dimension for mixed")
    p.add_argument("--a", type=float, help="kfp parameter")
    p.add_argument("--allow-nondissipative", action="store_true", help="accept Re Q not <= 0")
    p.add_argument("--split", action="store_true", help="require the symplectic split")
    p.add_argument("--json", metavar="PATH", help="write the JSON report ('-' for stdout)")
    p.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED, help="seed for randomized sampling")


def build_parser():
    parser = argparse.ArgumentParser(prog="quadflow", description="Decay analysis of quadratic semigroups exp(t q^w).")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="invariants, singular space, split and decay exponents")
    _model_args(pa)
    pa.add_argument("--t", type=float, nargs="+", default=[1.0], help="times for the dispersive singular values")

    pd = sub.add_parser("decay", help="Gabor-matrix decay sweeps with CSV output")
    _model_args(pd)
    pd.add_argument("--tmin", type=float, default=1.0)
    pd.add_argument("--tmax", type=float, default=6.0)
    pd.add_argument("--steps", type=int, default=11, help="number of times (0 gives empty sweeps)")
    pd.add_argument("--spacing", choices=["log", "linear"], default="log", help="t grid spacing")
    pd.add_argument("--N", type=int, default=4, help="off-diagonal weights (1 + |w - z|)^{2N} for N = 1..N")
    pd.add_argument("--t", type=float, default=None, help="time of the off-diagonal sweep")
    pd.add_argument("--nu", type=float, default=None, help="fractional power in (0, 1)")
    pd.add_argument("--schur", action="store_true", help="also estimate Schur integrals on the t grid")
    pd.add_argument("--csv-dir", default=None, help="directory for the sweep CSVs")
    pd.add_argument("--rate-tol", type=float, default=0.05, help="relative tolerance on the fitted rate")

    pv = sub.add_parser("verify", help="run acceptance checks")
    pv.add_argument("--suite", choices=list(acceptance.SUITES) + ["all", "none"], default="all")
    pv.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    pv.add_argument("--json", metavar="PATH", help="write the JSON summary ('-' for stdout)")
    return parser


def load(args):
    """ModelSpec from --model/--file plus parameters."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModelWarning)
        try:
            if args.file:
                return load_model(args.file)
            name = args.model or "hermite"
            params = {}
            if name in ("hermite", "twisted"):
                params["d"] = 1 if args.d is None else args.d
            elif name == "kfp":
                if args.a is None:
                    raise CliExit(EXIT_INVALID, "kfp needs --a")
                params["a"] = args.a
            elif name == "mixed":
                params["d1"] = 1 if args.d1 is None else args.d1
                params["d2"] = 1 if args.d2 is None else args.d2
            return builtin(name, **params)
        except (QuadflowError, ValueError, OSError) as exc:
            raise CliExit(EXIT_INVALID, f"invalid model: {exc}") from exc


def validate(a, args):
    """Raise CliExit for the model pathologies covered by the exit-code taxonomy."""
    if not a.dissipative and not args.allow_nondissipative:
        raise CliExit(EXIT_INVALID, "Re Q is not negative semidefinite (use --allow-nondissipative)")
    if a.regime == NONSYMPLECTIC and args.split:
        raise CliExit(EXIT_NONSYMPLECTIC, f"singular space of dimension {a.singular.dim} is not symplectic")
    if not a.F1_diagonalizable:
        raise CliExit(EXIT_NONDIAG, "Hamilton map of the dissipative part is not diagonalizable")


def emit_json(text, path):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def slug(label):
    return re.sub(r"[^A-Za-z0-9.-]+", "_", label).strip("_")


def t_grid(args):
    if args.steps <= 0:
        return np.zeros(0)
    if args.spacing == "log" and args.tmin > 0:
        return np.geomspace(args.tmin, args.tmax, args.steps)
    return np.linspace(args.tmin, args.tmax, args.steps)


def cmd_analyze(args, out):
    spec = load(args)
    a = analyze(spec)
    report = build_report(a, times=args.t)
    out.write(format_table(report))
    if args.json:
        emit_json(report.to_json(), args.json)
    validate(a, args)
    return EXIT_OK


def cmd_decay(args, out):
    spec = load(args)
    a = analyze(spec)
    validate(a, args)
    if a.regime == NONSYMPLECTIC:
        raise CliExit(EXIT_NONSYMPLECTIC, "decay sweeps need S = {0} or a symplectic singular space")
    times = t_grid(args)
    N_list = tuple(range(1, max(args.N, 0) + 1))
    rep = verify_decay(a, times, N_list=N_list, t_offdiag=args.t)
    schur = [schur_bound(a, t) for t in times] if args.schur else []
    summary = verification_summary(rep, schur)
    if args.nu is not None:
        rate = a.mu_prime or 0.0
        summary["fractional"] = {
            "nu": args.nu,
            "mu": rate,
            "rate": rate**args.nu,
            "envelope": [fractional_exponent(rate, args.nu, t) for t in times],
        }
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        base = os.path.join(args.csv_dir, slug(a.label))
        write_csv(f"{base}_diagonal.csv", rep.diagonal_rows())
        for N in N_list:
            rows = rep.offdiag_rows(N) if len(times) else []
            write_csv(f"{base}_offdiag_N{N}.csv", rows)
    out.write(f"model          {a.label}\n")
    out.write(f"times          {len(times)} in [{fmt(args.tmin)}, {fmt(args.tmax)}]\n")
    if len(times) >= 2:
        correction = " (with log det Sigma correction)" if rep.log_det_sigma.any() else ""
        out.write(f"fitted rate    {fmt(rep.fitted_rate)}{correction}\n")
        out.write(f"expected rate  {fmt(rep.expected_rate)}\n")
        out.write(f"rate error     {fmt(rep.rate_error)}\n")
    for N, s in rep.sup_stats.items():
        out.write(f"sup N={N}        {fmt(s)}\n")
    for s in schur:
        out.write(f"schur t={fmt(s.t)}  row {fmt(s.row)} col {fmt(s.col)} ratio {fmt(s.ratio)}\n")
    if args.nu is not None:
        out.write(f"fractional     exp(-t {fmt(summary['fractional']['rate'])})\n")
    if args.json:
        emit_json(build_report(a, times=times, verification=summary).to_json(), args.json)
    if not rep.rate_ok(args.rate_tol):
        raise CliExit(EXIT_RATE, f"fitted rate {fmt(rep.fitted_rate)} deviates from {fmt(rep.expected_rate)} beyond {args.rate_tol:g}")
    return EXIT_OK


def cmd_verify(args, out):
    results = acceptance.run_suite(args.suite, args.seed)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}\n")
    passed = all(r.passed for r in results)
    out.write(f"{sum(r.passed for r in results)}/{len(results)} checks passed\n")
    summary = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": passed,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    }
    if args.json:
        emit_json(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.json)
    if not passed:
        failed = ", ".join(r.name for r in results if not r.passed)
        raise CliExit(EXIT_VERIFY, f"failed checks: {failed}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "decay": cmd_decay, "verify": cmd_verify}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except CliExit as exc:
        print(f"quadflow: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
