"""Command-line entry point.

Exit codes: 0 success (or "uniform"), 1 "non_uniform" or failed experiment
checks, 2 usage/input error, 3 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

from .bounds import TailEnvelope, scale_param, theorem1_envelope, variance_proxy
from .defaults import load_defaults
from .distribution import (
    SampleSeed,
    collision_probability,
    make_pmf,
    planted_bias,
    pmf_from_spec,
    power_sum,
    sample_histogram,
    uniform,
    zipf,
)
from .estimator import (
    Decision,
    EntropyUndefinedError,
    entropy_estimate,
    estimate_from_histogram,
    histogram_of,
    uniformity_test,
)
from .harness import ExperimentConfig, run_experiment
from .moments import moment_table_rows

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_sample(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read sample file {path!r}: {exc}") from exc
    tokens = [line.strip() for line in text.splitlines()]
    tokens = [t for t in tokens if t]
    if any(len(t.split()) != 1 for t in tokens):
        raise UsageError(f"malformed sample file {path!r}: expected one symbol per line")
    if len(tokens) < 2:
        raise UsageError(f"sample file {path!r} holds {len(tokens)} symbols; need at least 2")
    return tokens


def _csv_floats(text: str, cast=float) -> list:
    try:
        return [cast(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from exc


def _pmf_from_args(args):
    chosen = [a for a in ("uniform", "zipf", "planted", "weights", "distribution") if getattr(args, a, None) is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --uniform, --zipf, --planted, --weights, --distribution")
    if args.uniform is not None:
        return uniform(args.uniform)
    if args.zipf is not None:
        return zipf(int(args.zipf[0]), float(args.zipf[1]))
    if args.planted is not None:
        return planted_bias(int(args.planted[0]), float(args.planted[1]))
    if args.weights is not None:
        return make_pmf(_csv_floats(args.weights))
    try:
        return pmf_from_spec(json.loads(args.distribution))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad --distribution spec: {exc}") from exc


def _envelope_from_args(args) -> TailEnvelope:
    env = load_defaults().envelope.to_dict()
    for name in ("c_out", "c_sq", "c_lin", "c_heavy"):
        v = getattr(args, name, None)
        if v is not None:
            env[name] = v
    return TailEnvelope.from_dict(env)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


# -- subcommands ----------------------------------------------------------------


def cmd_estimate(args) -> int:
    hist = histogram_of(_read_sample(args.sample))
    est = estimate_from_histogram(hist)
    try:
        h2 = entropy_estimate(hist, args.base)
    except EntropyUndefinedError:
        h2 = None
    payload = {
        "n": est.n,
        "distinct": hist.m,
        "collision_pairs": est.collision_pairs,
        "q_hat": est.q_hat,
        "entropy": h2,
        "entropy_base": args.base,
    }
    lines = [
        f"n = {est.n}",
        f"distinct = {hist.m}",
        f"collision_pairs = {est.collision_pairs}",
        f"q_hat = {est.q_hat!r}",
        f"entropy = {h2!r}" if h2 is not None else "entropy = undefined (no collisions; increase n)",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_test_uniformity(args) -> int:
    if args.sample is not None and args.distribution is not None:
        raise UsageError("give either a sample file or --distribution, not both")
    if args.sample is not None:
        hist = histogram_of(_read_sample(args.sample))
        if hist.m > args.m:
            raise UsageError(f"sample has {hist.m} distinct symbols but --m is {args.m}")
    elif args.distribution is not None:
        if args.n is None:
            raise UsageError("--distribution needs --n")
        try:
            pmf = pmf_from_spec(json.loads(args.distribution))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"bad --distribution spec: {exc}") from exc
        if pmf.m != args.m:
            raise UsageError(f"distribution has {pmf.m} symbols but --m is {args.m}")
        hist = sample_histogram(pmf, args.n, SampleSeed(args.seed, 0))
    else:
        raise UsageError("give a sample file or --distribution")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        decision = uniformity_test(hist, args.m, args.epsilon)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    est = estimate_from_histogram(hist)
    threshold = (1.0 + args.epsilon) / args.m
    payload = {"decision": decision.value, "q_hat": est.q_hat, "threshold": threshold, "n": est.n, "m": args.m, "epsilon": args.epsilon}
    lines = [decision.value, f"q_hat = {est.q_hat!r}", f"threshold = {threshold!r}", f"n = {est.n}"]
    _emit(args, payload, lines)
    return EXIT_REJECT if decision is Decision.NON_UNIFORM else EXIT_OK


def cmd_bounds(args) -> int:
    pmf = _pmf_from_args(args)
    env = _envelope_from_args(args)
    n = args.n
    v2, b = variance_proxy(pmf, n), scale_param(pmf, n)
    if args.epsilon:
        eps = _csv_floats(args.epsilon)
    else:
        eps = [math.sqrt(v2) * f for f in (0.5, 1, 2, 4, 8)]
    table = [{"epsilon": e, "envelope": theorem1_envelope(e, pmf, n, env)} for e in eps]
    payload = {
        "m": pmf.m,
        "n": n,
        "Q": collision_probability(pmf),
        "power_sum_3": power_sum(pmf, 3),
        "v2": v2,
        "b": b,
        "envelope_constants": env.to_dict(),
        "envelope": table,
    }
    lines = [
        f"m = {pmf.m}",
        f"n = {n}",
        f"Q = {payload['Q']!r}",
        f"power_sum_3 = {payload['power_sum_3']!r}",
        f"v2 = {v2!r}",
        f"b = {b!r}",
        "epsilon,envelope",
        *(f"{r['epsilon']!r},{r['envelope']!r}" for r in table),
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_moment_table(args) -> int:
    defaults = load_defaults()
    C1 = args.C1 if args.C1 is not None else defaults.bin_moment_C1
    C2 = args.C2 if args.C2 is not None else defaults.bin_moment_C2
    C = args.C if args.C is not None else defaults.symm_diff_C
    ns = _csv_floats(args.n, int)
    ps = _csv_floats(args.p)
    ds = _csv_floats(args.d, int)
    rows = moment_table_rows(ns, ps, ds, C1, C2, kind=args.kind, C=C)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "p", "d", "exact", "bound", "ratio"])
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    if args.json:
        print(json.dumps([dict(zip(["n", "p", "d", "exact", "bound", "ratio"], r)) for r in rows], indent=2))
    elif not args.out:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _load_config(args) -> ExperimentConfig:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load config {args.config!r}: {exc}") from exc
    for key in ("seed", "trials", "out", "workers", "delta", "n", "m"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    if getattr(args, "epsilon", None):
        raw["epsilons"] = _csv_floats(args.epsilon)
    env = {k: getattr(args, k) for k in ("c_out", "c_sq", "c_lin", "c_heavy") if getattr(args, k, None) is not None}
    if env:
        raw["envelope"] = {**(raw.get("envelope") or load_defaults().envelope.to_dict()), **env}
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as exc:
        raise UsageError(f"bad config: {exc}") from exc


def _report_lines(report) -> list[str]:
    lines = [f"kind = {report.kind}", f"passed = {report.passed}"]
    lines += [f"check {k} = {v}" for k, v in report.checks.items()]
    lines.append(report.to_csv().rstrip("\n"))
    return lines


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    if args.expect_kind and cfg.kind != args.expect_kind:
        raise UsageError(f"config kind is {cfg.kind!r}, expected {args.expect_kind!r}")
    report = run_experiment(cfg)
    _emit(args, report.summary(), _report_lines(report))
    return EXIT_OK if report.passed else EXIT_REJECT


# -- parser ---------------------------------------------------------------------


def _add_common(p, *, seed=False, trials=False, n=False, m=False, epsilon=False, delta=False, config=False, out=False, envelope=False):
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    if seed:
        p.add_argument("--seed", type=int, default=None)
    if trials:
        p.add_argument("--trials", type=int, default=None)
    if n:
        p.add_argument("--n", type=int, default=None)
    if m:
        p.add_argument("--m", type=int, default=None)
    if epsilon:
        p.add_argument("--epsilon", type=str, default=None, help="value or comma-separated grid")
    if delta:
        p.add_argument("--delta", type=float, default=None)
    if config:
        p.add_argument("--config", required=True)
    if out:
        p.add_argument("--out", default=None)
    if envelope:
        p.add_argument("--c-out", dest="c_out", type=float, default=None)
        p.add_argument("--c-sq", dest="c_sq", type=float, default=None)
        p.add_argument("--c-lin", dest="c_lin", type=float, default=None)
        p.add_argument("--c-heavy", dest="c_heavy", type=float, default=None)


def _add_pmf_flags(p):
    p.add_argument("--uniform", type=int, metavar="M")
    p.add_argument("--zipf", nargs=2, metavar=("M", "S"))
    p.add_argument("--planted", nargs=2, metavar=("M", "ALPHA"))
    p.add_argument("--weights", metavar="W1,W2,...")
    p.add_argument("--distribution", metavar="JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collision", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="collision probability and Renyi-2 entropy of a sample file")
    p.add_argument("sample", help="file with one symbol per line")
    p.add_argument("--base", type=float, default=2.0)
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("test-uniformity", help="collision-based uniformity test")
    p.add_argument("sample", nargs="?", default=None)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--distribution", metavar="JSON", help="draw the sample from this distribution")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_test_uniformity)

    p = sub.add_parser("bounds", help="variance proxy, scale and tail envelope for a pmf")
    _add_pmf_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=str, default=None, help="comma-separated epsilon grid")
    _add_common(p, envelope=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("moment-table", help="CSV of exact vs bounded moments")
    p.add_argument("--n", default="2,5,10,50,100")
    p.add_argument("--p", default="0.01,0.1,0.5")
    p.add_argument("--d", default="2,4,6,8")
    p.add_argument("--kind", choices=("bin", "symm"), default="bin")
    p.add_argument("--C1", type=float, default=None)
    p.add_argument("--C2", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    _add_common(p, out=True)
    p.set_defaults(func=cmd_moment_table)

    for name, kind in (("experiment", None), ("calibrate", "calibrate")):
        p = sub.add_parser(name, help="run a harness config" if kind is None else "fit tail-envelope constants")
        _add_common(p, seed=True, trials=True, n=True, m=True, epsilon=True, delta=True, config=True, out=True, envelope=True)
        p.add_argument("--workers", type=int, default=None)
        p.set_defaults(func=cmd_experiment, expect_kind=kind)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # validation errors from the library are input problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
