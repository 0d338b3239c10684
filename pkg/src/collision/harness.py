"""Seeded Monte Carlo and exact-enumeration experiments.

Every trial draws from its own stream ``SampleSeed(master_seed, stream_id)``
and contributes only counts to the final reduction, so a report is identical
for any number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import __version__
from .bounds import TailEnvelope, envelope_value, scale_param, theorem1_envelope, variance_proxy
from .defaults import load_defaults
from .distribution import (
    DiscretePmf,
    SampleSeed,
    collision_probability,
    planted_bias,
    pmf_from_spec,
    sample_histogram,
    sample_indices,
    uniform,
)
from .estimator import (
    Decision,
    SampleHistogram,
    entropy_sample_size,
    estimate_from_histogram,
    tester_sample_size,
    uniformity_test,
)

log = logging.getLogger(__name__)

__all__ = [
    "CalibrationError",
    "ExperimentConfig",
    "TrialReport",
    "calibrate_constants",
    "fit_envelope",
    "fit_sample_constant",
    "run_boosting_comparison",
    "run_entropy_experiment",
    "run_experiment",
    "run_negcorr_check",
    "run_tail_experiment",
    "run_tester_experiment",
    "wilson_interval",
]

KINDS = ("tail", "tester", "entropy", "negcorr", "calibrate", "boosting")

# stream_id = (block << 40) + trial keeps cases/epsilons on disjoint streams
_BLOCK = 1 << 40


class CalibrationError(RuntimeError):
    """No positive constants make the envelope dominate a calibration cell."""

    def __init__(self, message: str, cell: dict | None = None):
        super().__init__(message)
        self.cell = cell


def wilson_interval(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment; see README for the JSON schema."""

    kind: str
    distribution: dict | None = None
    n: int | None = None
    epsilons: list[float] = field(default_factory=list)
    delta: float = 0.1
    trials: int = 1000
    seed: int = 0
    envelope: dict | None = None
    out: str | None = None
    m: int | None = None
    C: float | None = None
    k: int = 1
    cells: list[dict] = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        self.trials = int(self.trials)
        eps = [float(e) for e in self.epsilons]
        if any(e <= 0 for e in eps):
            raise ValueError("epsilon grid must be strictly positive")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        self.epsilons = eps
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        # worker count and output path do not affect results
        d = self.to_dict()
        d.pop("workers")
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def pmf(self) -> DiscretePmf:
        if self.distribution is None:
            raise ValueError(f"{self.kind} experiment needs a 'distribution'")
        return pmf_from_spec(self.distribution)

    def tail_envelope(self) -> TailEnvelope:
        if self.envelope:
            return TailEnvelope.from_dict(self.envelope)
        return load_defaults().envelope


@dataclass
class TrialReport:
    """Rows of one experiment plus named pass/fail checks and provenance."""

    kind: str
    columns: list[str]
    rows: list[dict]
    checks: dict[str, bool]
    provenance: dict
    wall_clock: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "checks": self.checks,
            "rows": self.rows,
            "extra": self.extra,
            "provenance": self.provenance,
            "wall_clock_s": self.wall_clock,
        }

    def write(self, out: str | Path) -> tuple[Path, Path]:
        """Write ``<out>`` (CSV) and ``<out stem>.json`` (summary)."""
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.to_csv(), encoding="utf-8")
        js = out.with_suffix(".json")
        js.write_text(json.dumps(self.summary(), indent=2, default=_jsonable) + "\n", encoding="utf-8")
        return out, js


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v))


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"config_hash": cfg.config_hash(), "seed": cfg.seed, "version": __version__}


def _map_trials(fn: Callable[[int], Any], trials: int, workers: int) -> list:
    """``[fn(0), ..., fn(trials-1)]`` in trial order, optionally on a thread pool."""
    if workers == 1:
        return [fn(t) for t in range(trials)]
    chunk = max(1, trials // (4 * workers))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials), chunksize=chunk))


def _q_hats(pmf: DiscretePmf, n: int, seed: int, block: int, trials: int, workers: int) -> np.ndarray:
    def one(t: int) -> float:
        h = sample_histogram(pmf, n, SampleSeed(seed, block * _BLOCK + t))
        return estimate_from_histogram(h).q_hat

    return np.array(_map_trials(one, trials, workers))


def _rate_row(events: int, trials: int) -> dict:
    lo, hi = wilson_interval(events, trials)
    return {"events": events, "trials": trials, "frequency": events / trials, "wilson_lo": lo, "wilson_hi": hi}


# -- tail -----------------------------------------------------------------------


def run_tail_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Empirical ``P[|q_hat - Q| > eps]`` on the epsilon grid versus the tail envelope."""
    if cfg.kind not in ("tail", "calibrate"):
        raise ValueError(f"expected a tail config, got kind={cfg.kind!r}")
    if cfg.n is None or cfg.n < 2:
        raise ValueError("tail experiment needs n >= 2")
    if not cfg.epsilons:
        raise ValueError("tail experiment needs a non-empty epsilon grid")
    start = time.perf_counter()
    pmf = cfg.pmf()
    env = cfg.tail_envelope()
    Q = collision_probability(pmf)
    dev = np.abs(_q_hats(pmf, cfg.n, cfg.seed, 0, cfg.trials, cfg.workers) - Q)
    rows = []
    v2, b = variance_proxy(pmf, cfg.n), scale_param(pmf, cfg.n)
    for eps in cfg.epsilons:
        row = {"epsilon": eps, **_rate_row(int(np.count_nonzero(dev > eps)), cfg.trials)}
        row["envelope"] = theorem1_envelope(eps, pmf, cfg.n, env)
        row["pass"] = row["wilson_hi"] <= row["envelope"]
        rows.append(row)
    cols = ["epsilon", "events", "trials", "frequency", "wilson_lo", "wilson_hi", "envelope", "pass"]
    return TrialReport(
        "tail",
        cols,
        rows,
        {"envelope_dominates_upper_wilson": all(r["pass"] for r in rows)},
        _provenance(cfg),
        time.perf_counter() - start,
        {"Q": Q, "v2": v2, "b": b, "n": cfg.n, "envelope": env.to_dict()},
    )


# -- tester ---------------------------------------------------------------------


def _tester_setup(cfg: ExperimentConfig):
    m = cfg.m if cfg.m is not None else (pmf_from_spec(cfg.distribution).m if cfg.distribution else None)
    if m is None:
        raise ValueError("tester experiment needs 'm' (or a distribution to take it from)")
    if not cfg.epsilons:
        raise ValueError("tester experiment needs at least one epsilon")
    C = cfg.C if cfg.C is not None else load_defaults().tester_C
    return int(m), C


def _tester_cases(cfg: ExperimentConfig, m: int, eps: float) -> list[tuple[str, DiscretePmf, Decision]]:
    near = pmf_from_spec(cfg.distribution) if cfg.distribution else uniform(m)
    if near.m != m:
        raise ValueError(f"case (a) distribution has m={near.m}, expected {m}")
    far = planted_bias(m, min(1.0, 2.0 * eps))
    return [("a", near, Decision.UNIFORM), ("b", far, Decision.NON_UNIFORM)]


def _tester_errors(pmf, n, m, eps, expected, seed, block, trials, workers, k=1) -> int:
    """Number of wrong decisions; with ``k > 1`` the median of ``k`` estimates is thresholded."""
    per_run = n // k

    def one(t: int) -> bool:
        sid = SampleSeed(seed, block * _BLOCK + t)
        if k == 1:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return uniformity_test(sample_histogram(pmf, n, sid), m, eps) != expected
        draws = sample_indices(pmf, per_run * k, sid).reshape(k, per_run)
        q = [estimate_from_histogram(SampleHistogram(np.bincount(row, minlength=m))).q_hat for row in draws]
        decided = Decision.NON_UNIFORM if float(np.median(q)) > (1.0 + eps) / m else Decision.UNIFORM
        return decided != expected

    return int(sum(_map_trials(one, trials, workers)))


def run_tester_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Error rates of the collision tester on a near-uniform and a far-from-uniform pmf."""
    if cfg.kind not in ("tester", "boosting"):
        raise ValueError(f"expected a tester config, got kind={cfg.kind!r}")
    start = time.perf_counter()
    m, C = _tester_setup(cfg)
    if any(not 1 / math.sqrt(m) <= e <= 1 for e in cfg.epsilons):
        log.warning("epsilon outside [1/sqrt(m), 1]; the tester guarantee does not apply")
    rows = []
    for i, eps in enumerate(cfg.epsilons):
        n = cfg.n if cfg.n is not None else tester_sample_size(m, eps, cfg.delta, C)
        for j, (case, pmf, expected) in enumerate(_tester_cases(cfg, m, eps)):
            errs = _tester_errors(pmf, n, m, eps, expected, cfg.seed, 2 * i + j, cfg.trials, cfg.workers)
            row = {"case": case, "epsilon": eps, "m": m, "n": n, "Q": collision_probability(pmf)}
            row.update(_rate_row(errs, cfg.trials))
            row["delta"] = cfg.delta
            row["pass"] = row["wilson_hi"] <= cfg.delta
            rows.append(row)
    cols = ["case", "epsilon", "m", "n", "Q", "events", "trials", "frequency", "wilson_lo", "wilson_hi", "delta", "pass"]
    return TrialReport(
        "tester",
        cols,
        rows,
        {"error_rates_below_delta": all(r["pass"] for r in rows)},
        _provenance(cfg),
        time.perf_counter() - start,
        {"C": C},
    )


def run_boosting_comparison(cfg: ExperimentConfig) -> TrialReport:
    """Single run on the whole budget versus the median of ``k`` runs on ``budget // k`` each."""
    if cfg.kind != "boosting":
        raise ValueError(f"expected a boosting config, got kind={cfg.kind!r}")
    start = time.perf_counter()
    m, C = _tester_setup(cfg)
    k = int(cfg.k)
    rows = []
    ok = True
    for i, eps in enumerate(cfg.epsilons):
        budget = cfg.n if cfg.n is not None else tester_sample_size(m, eps, cfg.delta, C)
        if k < 1 or k > budget // 2:
            raise ValueError(f"k={k} must satisfy 1 <= k <= budget/2 = {budget // 2}")
        if budget % k:
            warnings.warn(f"k={k} does not divide budget {budget}; each run uses {budget // k} samples")
        for j, (case, pmf, expected) in enumerate(_tester_cases(cfg, m, eps)):
            block = 2 * i + j
            single = _tester_errors(pmf, budget, m, eps, expected, cfg.seed, block, cfg.trials, cfg.workers)
            boosted = _tester_errors(pmf, budget, m, eps, expected, cfg.seed, block, cfg.trials, cfg.workers, k=k)
            r1 = {"case": case, "epsilon": eps, "method": "single", "k": 1, "n_per_run": budget}
            r1.update(_rate_row(single, cfg.trials))
            rk = {"case": case, "epsilon": eps, "method": "median", "k": k, "n_per_run": budget // k}
            rk.update(_rate_row(boosted, cfg.trials))
            width = rk["wilson_hi"] - rk["wilson_lo"]
            r1["pass"] = r1["frequency"] <= rk["frequency"] + width
            rk["pass"] = True
            ok &= r1["pass"]
            rows += [r1, rk]
    cols = ["case", "epsilon", "method", "k", "n_per_run", "events", "trials", "frequency", "wilson_lo", "wilson_hi", "pass"]
    return TrialReport(
        "boosting",
        cols,
        rows,
        {"single_run_no_worse_than_median": ok},
        _provenance(cfg),
        time.perf_counter() - start,
        {"C": C, "k": k},
    )


# -- entropy --------------------------------------------------------------------


def run_entropy_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Frequency of relative error ``|q_hat - Q| > eps Q`` at the prescribed sample size."""
    if cfg.kind != "entropy":
        raise ValueError(f"expected an entropy config, got kind={cfg.kind!r}")
    if not cfg.epsilons:
        raise ValueError("entropy experiment needs at least one epsilon")
    start = time.perf_counter()
    pmf = cfg.pmf()
    Q = collision_probability(pmf)
    C = cfg.C if cfg.C is not None else load_defaults().entropy_C
    rows = []
    for i, eps in enumerate(cfg.epsilons):
        n = cfg.n if cfg.n is not None else entropy_sample_size(Q, eps, cfg.delta, C)
        dev = np.abs(_q_hats(pmf, n, cfg.seed, i, cfg.trials, cfg.workers) - Q)
        row = {"epsilon": eps, "Q": Q, "n": n, **_rate_row(int(np.count_nonzero(dev > eps * Q)), cfg.trials)}
        row["delta"] = cfg.delta
        row["pass"] = row["wilson_hi"] <= cfg.delta
        rows.append(row)
    cols = ["epsilon", "Q", "n", "events", "trials", "frequency", "wilson_lo", "wilson_hi", "delta", "pass"]
    return TrialReport(
        "entropy",
        cols,
        rows,
        {"relative_error_rate_below_delta": all(r["pass"] for r in rows)},
        _provenance(cfg),
        time.perf_counter() - start,
        {"C": C},
    )


# -- negative correlation by enumeration ----------------------------------------

_MAX_OUTCOMES = 10**6


def run_negcorr_check(m: int, n: int, pmf: DiscretePmf) -> np.ndarray:
    """Exact covariance matrix of the bin contributions ``S_x^2 - S_x``.

    Enumerates all ``m^n`` samples; entry ``[x, y]`` is ``Cov(S_x^2-S_x, S_y^2-S_y)``.
    """
    if pmf.m != m:
        raise ValueError(f"pmf has {pmf.m} symbols, expected m={m}")
    if m**n > _MAX_OUTCOMES:
        raise ValueError(f"m^n = {m**n} outcomes exceed the enumeration limit {_MAX_OUTCOMES}")
    if n < 1:
        raise ValueError("n must be >= 1")
    p = pmf.probs
    outcomes = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64)
    weight = np.prod(p[outcomes], axis=1)
    loads = np.stack([np.count_nonzero(outcomes == x, axis=1) for x in range(m)], axis=1).astype(float)
    contrib = loads * loads - loads
    mean = weight @ contrib
    centered = contrib - mean
    return (centered * weight[:, None]).T @ centered


def _negcorr_report(cfg: ExperimentConfig) -> TrialReport:
    start = time.perf_counter()
    pmf = cfg.pmf()
    if cfg.n is None:
        raise ValueError("negcorr check needs n")
    cov = run_negcorr_check(pmf.m, cfg.n, pmf)
    rows = []
    for x in range(pmf.m):
        for y in range(pmf.m):
            if x != y:
                rows.append({"x": x, "y": y, "covariance": float(cov[x, y]), "pass": bool(cov[x, y] <= 1e-12)})
    return TrialReport(
        "negcorr",
        ["x", "y", "covariance", "pass"],
        rows,
        {"offdiagonal_nonpositive": all(r["pass"] for r in rows)},
        _provenance(cfg),
        time.perf_counter() - start,
    )


# -- calibration ----------------------------------------------------------------


def fit_envelope(observations: Iterable[dict], c_out: float = 2.0, resolution: float = 1.1) -> TailEnvelope:
    """Fit the three exponent constants to empirical tail upper bounds.

    Each observation carries ``epsilon, v2, b, n, upper``. Every constant is the
    largest value on the geometric grid ``resolution**k`` for which its branch
    alone, ``c_out * exp(-c * branch)``, stays above ``upper`` in every cell.
    The min-of-three envelope then dominates all cells, and adding cells can
    only lower the fitted constants.
    """
    obs = list(observations)
    if not obs:
        raise ValueError("calibration needs at least one cell")
    best = {"c_sq": math.inf, "c_lin": math.inf, "c_heavy": math.inf}
    for o in obs:
        eps, upper = float(o["epsilon"]), float(o["upper"])
        budget = math.log(c_out / upper) if upper > 0 else math.inf
        if budget <= 0:
            raise CalibrationError(
                f"empirical tail upper bound {upper:.4g} is not below c_out={c_out}", dict(o)
            )
        branches = {
            "c_sq": eps**2 / o["v2"] if o["v2"] > 0 else math.inf,
            "c_lin": eps / o["b"] if o["b"] > 0 else math.inf,
            "c_heavy": o["n"] * math.sqrt(eps),
        }
        for name, value in branches.items():
            best[name] = min(best[name], budget / value)
    fitted = {}
    for name, c in best.items():
        if c == math.inf:
            c = resolution**100
        k = math.floor(math.log(c) / math.log(resolution) + 1e-9)
        fitted[name] = resolution**k
    return TailEnvelope(c_out=c_out, **fitted)


def _calibration_cells(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    if not cfg.cells:
        raise ValueError("calibration needs a non-empty 'cells' list")
    out = []
    for i, cell in enumerate(cfg.cells):
        pmf = pmf_from_spec(cell["distribution"])
        n = int(cell["n"])
        if "epsilons" in cell:
            eps = [float(e) for e in cell["epsilons"]]
        else:
            v = math.sqrt(variance_proxy(pmf, n))
            eps = [v * float(f) for f in cell["v_multiples"]]
        out.append(
            ExperimentConfig(
                kind="tail",
                distribution=cell["distribution"],
                n=n,
                epsilons=eps,
                trials=int(cell.get("trials", cfg.trials)),
                seed=cfg.seed + i,
                envelope=TailEnvelope().to_dict(),
                workers=cfg.workers,
            )
        )
    return out


def _calibration_observations(cfg: ExperimentConfig):
    obs = []
    for i, cell_cfg in enumerate(_calibration_cells(cfg)):
        rep = run_tail_experiment(cell_cfg)
        for r in rep.rows:
            obs.append(
                {
                    "cell": i,
                    "family": cell_cfg.distribution["family"],
                    "n": cell_cfg.n,
                    "epsilon": r["epsilon"],
                    "v2": rep.extra["v2"],
                    "b": rep.extra["b"],
                    "frequency": r["frequency"],
                    "upper": r["wilson_hi"],
                }
            )
    return obs


def calibrate_constants(cfg: ExperimentConfig) -> TailEnvelope:
    """Monte Carlo tail estimates on every cell, then :func:`fit_envelope`."""
    if cfg.kind != "calibrate":
        raise ValueError(f"expected a calibrate config, got kind={cfg.kind!r}")
    c_out = (cfg.envelope or {}).get("c_out", TailEnvelope().c_out)
    return fit_envelope(_calibration_observations(cfg), c_out=c_out)


def _calibrate_report(cfg: ExperimentConfig) -> TrialReport:
    start = time.perf_counter()
    c_out = (cfg.envelope or {}).get("c_out", TailEnvelope().c_out)
    obs = _calibration_observations(cfg)
    try:
        env = fit_envelope(obs, c_out=c_out)
        ok, failure = True, None
    except CalibrationError as exc:
        env, ok, failure = None, False, exc.cell
    for o in obs:
        o["envelope"] = envelope_value(o["epsilon"], o["v2"], o["b"], o["n"], env) if env else math.nan
    cols = ["cell", "family", "n", "epsilon", "v2", "b", "frequency", "upper", "envelope"]
    return TrialReport(
        "calibrate",
        cols,
        obs,
        {"calibration_feasible": ok},
        _provenance(cfg),
        time.perf_counter() - start,
        {"envelope": env.to_dict() if env else None, "violating_cell": failure},
    )


def fit_sample_constant(
    configs: Sequence[ExperimentConfig],
    target_rate: float,
    start: float = 0.5,
    resolution: float = 1.1,
    max_steps: int = 60,
) -> float:
    """Smallest ``C = start * resolution**k`` at which every tester/entropy config
    shows an empirical failure frequency at most ``target_rate``."""
    if not configs:
        raise ValueError("need at least one config")
    for k in range(max_steps):
        C = start * resolution**k
        ok = True
        for cfg in configs:
            trial_cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "C": C, "out": None})
            rep = _RUNNERS[cfg.kind](trial_cfg)
            if any(r["frequency"] > target_rate for r in rep.rows):
                ok = False
                break
        if ok:
            return C
    raise CalibrationError(f"no constant up to {start * resolution ** (max_steps - 1):.3g} reaches rate {target_rate}")


_RUNNERS = {
    "tail": run_tail_experiment,
    "tester": run_tester_experiment,
    "entropy": run_entropy_experiment,
    "negcorr": _negcorr_report,
    "calibrate": _calibrate_report,
    "boosting": run_boosting_comparison,
}


def run_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Dispatch on ``cfg.kind`` and write outputs when ``cfg.out`` is set."""
    report = _RUNNERS[cfg.kind](cfg)
    if cfg.out:
        report.write(cfg.out)
    return report
