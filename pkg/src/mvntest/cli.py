"""Command-line interface: ``mvntest {test,critval,power}``.

Exit codes: 0 success, 1 rejection when ``--fail-on-reject`` is given,
2 input error (unreadable or malformed data), 3 configuration error.
Report bytes depend only on the inputs and the seed, never on timing or
on the number of worker processes; timing goes to the optional manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .alternatives import parse_alternative
from .montecarlo import (
    ENGINE_VERSION,
    ConfigError,
    critical_values,
    default_reps,
    power_study,
    pvalue_from_null,
)
from .registry import SpecError, evaluate, parse_tests
from .sample import InputError, SingularCovariance, load_dataset, standardize
from .weighted_l2 import HJM_MAX_N, ParameterError

EXIT_OK, EXIT_REJECT, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2, 3
DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p, need_dims):
    p.add_argument("--tests", default="default",
                   help='semicolon-separated test specs, e.g. "hz;bhep:beta=2"; "default" = full battery')
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=10000, help="Monte Carlo replications")
    p.add_argument("--hjm-reps", type=int, default=None, help="replication budget for HJM")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cache", default=None, help="critical-value cache directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.add_argument("--strict", action="store_true", help="require an explicit --seed")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--manifest", default=None, help="write a JSON run manifest here")
    p.add_argument("--allow-large-hjm", action="store_true",
                   help=f"permit HJM for n > {HJM_MAX_N} (cost grows like n^4)")
    if need_dims:
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--n", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvntest", description="Affine invariant tests of multivariate normality.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test a dataset for multivariate normality")
    t.add_argument("--data", required=True, help="delimited numeric text, one row per observation")
    t.add_argument("--header", action="store_true", help="skip the first non-comment row")
    t.add_argument("--fail-on-reject", action="store_true", help="exit 1 if any test rejects")
    _common(t, need_dims=False)

    c = sub.add_parser("critval", help="simulate null critical values")
    _common(c, need_dims=True)

    w = sub.add_parser("power", help="empirical power against an alternative")
    w.add_argument("--alt", required=True, help='alternative, e.g. "t:nu=3" or "null-reference"')
    _common(w, need_dims=True)
    return parser


def _num(v):
    """Deterministic text for a float (shortest round-trip form)."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _fmt(v, column="", digits=4):
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (str, int)):
        return str(v)
    if column.endswith("percent"):
        return f"{v:.1f}"
    return f"{v:.{digits}g}"


def _render(rows, columns, fmt):
    if fmt == "records":
        return "".join(json.dumps(r, sort_keys=False) + "\n" for r in rows)
    cells = [[c for c in columns]]
    for r in rows:
        cells.append([_fmt(r.get(c), c) for c in columns])
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(val.rjust(w) for val, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _seed(args):
    if args.seed is None:
        if args.strict:
            raise ConfigError("--strict requires an explicit --seed")
        return DEFAULT_SEED
    if args.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    return args.seed


def _tests(args, n):
    tests = parse_tests(args.tests, n)
    if n > HJM_MAX_N and not args.allow_large_hjm and any(t.name == "hjm" for t in tests):
        raise ConfigError(f"HJM requested with n={n} > {HJM_MAX_N}; pass --allow-large-hjm")
    if args.threads < 1:
        raise ConfigError("--threads must be positive")
    return tests


def _budgets(args, tests, power):
    out = {}
    for t in tests:
        if t.name == "hjm":
            if args.hjm_reps is not None:
                out[t] = args.hjm_reps
            else:
                out[t] = default_reps(t, args.reps) if power else args.reps
        else:
            out[t] = args.reps
    return out


def _cmd_test(args):
    seed = _seed(args)
    sample = load_dataset(args.data, header=args.header)
    y = standardize(sample)
    tests = _tests(args, sample.n)
    crits = critical_values(tests, sample.d, sample.n, args.alpha, _budgets(args, tests, False),
                            seed, args.threads, args.cache)
    rows, any_reject = [], False
    for t in tests:
        rec = crits[t]
        raw = evaluate(t, y, allow_large=True)
        scaled = raw * rec.scale
        reject = bool(rec.rejects(scaled))
        any_reject |= reject
        rows.append({
            "test": str(t), "d": sample.d, "n": sample.n, "raw": _num(raw), "scaled": _num(scaled),
            "critical_value": _num(rec.upper), "lower_critical_value": _num(rec.lower),
            "p_value": _num(pvalue_from_null(scaled, rec.null_values, t.two_sided)),
            "reject": reject, "alpha": args.alpha, "reps": rec.config.reps, "seed": seed,
        })
    cols = ["test", "raw", "scaled", "critical_value", "p_value", "reject"]
    hits = [str(t) for t in tests if crits[t].cache_hit]
    code = EXIT_REJECT if (any_reject and args.fail_on_reject) else EXIT_OK
    return _render(rows, cols, args.format), hits, code, seed


def _cmd_critval(args):
    seed = _seed(args)
    if args.d < 1 or args.n < args.d + 1:
        raise ConfigError("need d >= 1 and n >= d + 1")
    tests = _tests(args, args.n)
    crits = critical_values(tests, args.d, args.n, args.alpha, _budgets(args, tests, False),
                            seed, args.threads, args.cache)
    rows = []
    for t in tests:
        rec = crits[t]
        rows.append({
            "test": str(t), "d": args.d, "n": args.n, "alpha": args.alpha,
            "critical_value": _num(rec.upper), "lower_critical_value": _num(rec.lower),
            "scale": _num(rec.scale), "reps": rec.config.reps, "seed": seed,
            "cache_key": rec.config.digest(),
        })
    cols = ["test", "d", "n", "alpha", "critical_value", "lower_critical_value", "reps"]
    hits = [str(t) for t in tests if crits[t].cache_hit]
    return _render(rows, cols, args.format), hits, EXIT_OK, seed


def _cmd_power(args):
    seed = _seed(args)
    if args.d < 1 or args.n < args.d + 1:
        raise ConfigError("need d >= 1 and n >= d + 1")
    alt = parse_alternative(args.alt)
    alt.check_dimension(args.d)
    tests = _tests(args, args.n)
    crit_budget = _budgets(args, tests, False)
    crits = critical_values(tests, args.d, args.n, args.alpha, crit_budget, seed, args.threads,
                            args.cache)
    budgets = _budgets(args, tests, True)
    rates = power_study(tests, alt, args.d, args.n, crits, args.reps, seed, args.threads, budgets)
    rows = []
    for t in tests:
        rows.append({
            "test": str(t), "alternative": str(alt), "d": args.d, "n": args.n, "alpha": args.alpha,
            "rejection_percent": round(100.0 * rates[t], 1), "reps": budgets[t],
            "critical_value": _num(crits[t].upper), "seed": seed,
        })
    cols = ["test", "alternative", "d", "n", "rejection_percent", "reps"]
    hits = [str(t) for t in tests if crits[t].cache_hit]
    return _render(rows, cols, args.format), hits, EXIT_OK, seed


_COMMANDS = {"test": _cmd_test, "critval": _cmd_critval, "power": _cmd_power}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        report, hits, code, seed = _COMMANDS[args.command](args)
    except SingularCovariance as exc:
        print(f"mvntest: input error: {exc}. The data need n > d rows in general position; "
              "drop constant or collinear columns.", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"mvntest: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SpecError, ConfigError, ParameterError) as exc:
        print(f"mvntest: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    if args.manifest:
        config = {k: v for k, v in sorted(vars(args).items()) if k not in ("manifest",)}
        manifest = {
            "command": args.command,
            "argv": list(sys.argv[1:] if argv is None else argv),
            "config": config,
            "seed": seed,
            "engine_version": ENGINE_VERSION,
            "package_version": __version__,
            "started": started.isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
            "wall_clock_seconds": time.perf_counter() - t0,
            "cache_hits": hits,
            "output_sha256": hashlib.sha256(report.encode()).hexdigest(),
            "exit_code": code,
        }
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
