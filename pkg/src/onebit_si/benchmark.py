"""Monte-Carlo NMSE experiments over a parameter sweep.

Every trial draws its data once and hands the identical (x, A, y, SI) to each
requested algorithm. Trials can run on a thread pool; results are reduced in
(sweep value, trial) order so the output does not depend on scheduling.
"""

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import ChannelParams
from .errors import DomainError, GampDivergenceError, NumericalDegeneracyError
from .gamp import GampConfig, run_noisy1bg, run_with_si
from .priors import SignalPrior
from .sim import (
    NoisySupport,
    NoneSI,
    ScenarioConfig,
    SideInformation,
    SlowVarying,
    make_trial,
    nmse,
    support_labels,
)

__all__ = [
    "ALGORITHMS",
    "SWEEP_PARAMS",
    "ExperimentConfig",
    "TrialRecord",
    "ResultRow",
    "ResultTable",
    "run_algorithm",
    "run_experiment",
    "run_sequential_experiment",
    "aggregate",
]

ALGORITHMS = ("Noisy1bG", "LaplacianSI", "GaussianSI", "SupportSI", "SignGampBaseline")
SI_ALGORITHMS = ("LaplacianSI", "GaussianSI", "SupportSI")
CSV_HEADER = (
    "sweep_param", "sweep_value", "algorithm", "trials", "mean_nmse", "std_err",
    "mean_runtime_ms", "mean_estimated_param", "failures",
)


def _set_flip_prob(sc, value):
    return replace(sc, ch=ChannelParams(sc.ch.v, 1.0 - value))


def _set_protocol(attr):
    def setter(sc, value):
        return replace(sc, si_protocol=replace(sc.si_protocol, **{attr: value}))
    return setter


SWEEP_PARAMS = {
    "flip_prob": _set_flip_prob,
    "noise_var": lambda sc, v: replace(sc, ch=ChannelParams(v, sc.ch.gamma)),
    "M": lambda sc, v: replace(sc, M=int(v)),
    "N": lambda sc, v: replace(sc, N=int(v)),
    "lam": lambda sc, v: replace(sc, prior=SignalPrior(v, sc.prior.v_x)),
    "si_noise_var": _set_protocol("add_noise_var"),
    "support_error_frac": _set_protocol("support_error_frac"),
    "si_flip_frac": _set_protocol("flip_frac"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    algorithms: tuple = ("Noisy1bG",)
    sweep_param: Optional[str] = None
    sweep_values: tuple = ()
    trials: int = 50
    gamp_cfg: GampConfig = field(default_factory=GampConfig)
    vs_init: float = 1.0
    beta_init: float = 0.9
    support_threshold: float = 1e-3  # relative to max |x_hat|, for support SI from an estimate
    threads: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise DomainError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_PARAMS:
                raise DomainError(f"unknown sweep parameter {self.sweep_param!r}")
            for v in self.sweep_values:
                self.apply_sweep(v)  # raises on illegal values
        proto = self.scenario.si_protocol
        si_algs = [a for a in self.algorithms if a in SI_ALGORITHMS]
        if si_algs and isinstance(proto, NoneSI):
            raise DomainError(f"{si_algs} need a side-information protocol")
        if isinstance(proto, NoisySupport) and {"LaplacianSI", "GaussianSI"} & set(si_algs):
            raise DomainError("amplitude-SI algorithms need amplitude side information")

    def apply_sweep(self, value):
        if self.sweep_param is None:
            return self.scenario
        return SWEEP_PARAMS[self.sweep_param](self.scenario, value)

    def sweep_points(self):
        if self.sweep_param is None:
            return [None]
        return list(self.sweep_values)


@dataclass
class TrialRecord:
    sweep_value: object
    trial: int
    algorithm: str
    nmse: float
    runtime_ms: float
    estimated_param: Optional[float]
    failed: bool
    digest: str = ""
    error: str = ""


@dataclass
class ResultRow:
    sweep_param: str
    sweep_value: object
    algorithm: str
    trials: int
    mean_nmse: float
    std_err: float
    mean_runtime_ms: float
    mean_estimated_param: float
    failures: int


@dataclass
class ResultTable:
    rows: list
    records: list = field(default_factory=list)

    def row(self, sweep_value, algorithm):
        for r in self.rows:
            if r.sweep_value == sweep_value and r.algorithm == algorithm:
                return r
        raise KeyError((sweep_value, algorithm))

    def to_csv(self, fh=None):
        """Write the table; returns the text when ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([
                r.sweep_param, _fmt(r.sweep_value), r.algorithm, r.trials,
                _fmt(r.mean_nmse), _fmt(r.std_err), _fmt(r.mean_runtime_ms),
                _fmt(r.mean_estimated_param), r.failures,
            ])
        if fh is None:
            return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return format(v, ".17g")


def _digest(*arrays):
    h = hashlib.sha256()
    for a in arrays:
        if a is not None:
            h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()[:16]


def run_algorithm(name, A, y, sc: ScenarioConfig, si: Optional[SideInformation], cfg: ExperimentConfig):
    """Run one named algorithm; returns (x_hat, estimated parameter or None)."""
    g = cfg.gamp_cfg
    if name == "Noisy1bG":
        return run_noisy1bg(A, y, sc.prior, sc.ch, g).x_hat, None
    if name == "SignGampBaseline":
        # data keep their noisy channel; the reconstruction assumes none
        return run_noisy1bg(A, y, sc.prior, ChannelParams(0.0, 1.0), g).x_hat, None
    if name == "LaplacianSI":
        side = si.laplacian(cfg.vs_init)
    elif name == "GaussianSI":
        side = si.gaussian(cfg.vs_init)
    elif name == "SupportSI":
        side = si.support(cfg.beta_init)
    else:
        raise DomainError(f"unknown algorithm {name!r}")
    res = run_with_si(A, y, sc.prior, sc.ch, side, g)
    return res.x_hat, res.estimated_param


_NUMERIC_FAILURES = (GampDivergenceError, NumericalDegeneracyError, FloatingPointError)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, 1e3 * (time.perf_counter() - t0)


def _score(name, x_true, fn, sweep_value, trial, digest):
    """Run ``fn`` and score it; returns (record, x_hat or None on failure)."""
    x_hat = None
    try:
        (x_hat, param), ms = _timed(fn)
        val = nmse(x_true, x_hat)
        failed = not math.isfinite(val)
        err = "non-finite NMSE" if failed else ""
    except (*_NUMERIC_FAILURES, DomainError) as exc:
        # DomainError here means an all-zero true signal, for which NMSE is undefined
        val, ms, param, failed, err = float("nan"), float("nan"), None, True, str(exc)
    rec = TrialRecord(sweep_value, trial, name, val, ms, param, failed, digest, err)
    return rec, (None if failed else x_hat)


def _one_trial(cfg, sweep_value, trial):
    sc = cfg.apply_sweep(sweep_value)
    data = make_trial(sc, trial)
    si = data.si
    digest = _digest(data.x_true, data.A, data.y,
                     None if si is None else si.amplitude,
                     None if si is None else si.labels)
    return [
        _score(name, data.x_true,
               lambda name=name: run_algorithm(name, data.A, data.y, sc, si, cfg),
               sweep_value, trial, digest)[0]
        for name in cfg.algorithms
    ]


def _run_tasks(cfg, tasks, fn):
    if cfg.threads <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def aggregate(records, sweep_param, sweep_points, algorithms, timing=False):
    """Mean and standard error of NMSE per (sweep value, algorithm), in that order."""
    rows = []
    for sv in sweep_points:
        for name in algorithms:
            recs = [r for r in records if r.sweep_value == sv and r.algorithm == name]
            ok = [r for r in recs if not r.failed]
            vals = np.array([r.nmse for r in ok])
            n = vals.size
            mean = float(vals.mean()) if n else float("nan")
            se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else (0.0 if n else float("nan"))
            params = [r.estimated_param for r in ok if r.estimated_param is not None]
            rows.append(ResultRow(
                sweep_param or "",
                sv,
                name,
                len(recs),
                mean,
                se,
                float(np.mean([r.runtime_ms for r in ok])) if (timing and n) else float("nan"),
                float(np.mean(params)) if params else float("nan"),
                len(recs) - n,
            ))
    return rows


def run_experiment(cfg: ExperimentConfig):
    if isinstance(cfg.scenario.si_protocol, SlowVarying):
        return run_sequential_experiment(cfg)
    points = cfg.sweep_points()
    tasks = [(sv, t) for sv in points for t in range(cfg.trials)]
    records = [r for batch in _run_tasks(cfg, tasks, lambda sv, t: _one_trial(cfg, sv, t)) for r in batch]
    rows = aggregate(records, cfg.sweep_param, points, cfg.algorithms, cfg.timing)
    return ResultTable(rows, records)


def _support_from_estimate(x_hat, rel_threshold):
    peak = np.max(np.abs(x_hat))
    return support_labels(np.abs(x_hat) > rel_threshold * peak) if peak > 0 else -np.ones_like(x_hat)


def _sequence_trial(cfg, trial):
    sc = cfg.scenario
    data = make_trial(sc, trial)
    A = data.A
    records = []
    prev = {}
    for epoch, (x_true, y) in enumerate(data.epoch_sequence):
        digest = _digest(x_true, A, y)
        for name in cfg.algorithms:
            if epoch == 0 or name in ("Noisy1bG", "SignGampBaseline") or prev.get(name) is None:
                base = "Noisy1bG" if name in SI_ALGORITHMS else name
                fn = lambda base=base: run_algorithm(base, A, y, sc, None, cfg)
            else:
                est = prev[name]
                si = SideInformation(est, _support_from_estimate(est, cfg.support_threshold))
                fn = lambda name=name, si=si: run_algorithm(name, A, y, sc, si, cfg)
            rec, prev[name] = _score(name, x_true, fn, epoch, trial, digest)
            # after a failed epoch prev[name] is None, so the next one falls back to Noisy1bG
            records.append(rec)
    return records


def run_sequential_experiment(cfg: ExperimentConfig):
    """Per-epoch NMSE on a slowly varying sequence; SI is each algorithm's previous estimate."""
    proto = cfg.scenario.si_protocol
    if not isinstance(proto, SlowVarying):
        raise DomainError("sequential experiments need a slow_varying protocol")
    if cfg.sweep_param is not None:
        raise DomainError("sequential experiments are indexed by epoch and take no sweep")
    tasks = [(t,) for t in range(cfg.trials)]
    records = [r for batch in _run_tasks(cfg, tasks, lambda t: _sequence_trial(cfg, t)) for r in batch]
    rows = aggregate(records, "epoch", list(range(proto.epochs)), cfg.algorithms, cfg.timing)
    return ResultTable(rows, records)
