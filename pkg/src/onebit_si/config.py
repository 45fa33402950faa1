"""TOML experiment files.

Schema (every key optional; unknown keys are rejected)::

    seed = 0
    trials = 50
    threads = 1
    timing = false
    algorithms = ["Noisy1bG", "LaplacianSI"]

    [scenario]
    N = 200
    M = 600
    lam = 0.15          # P(x_n != 0)
    v_x = 5.5           # variance of the nonzero entries
    noise_var = 0.15    # pre-quantization noise variance v
    flip_prob = 0.15    # 1 - gamma

    [scenario.side_info]
    kind = "noisy_amplitude"   # none | noisy_amplitude | noisy_support | slow_varying
    support_error_frac = 0.1
    add_noise_var = 0.15
    noise_kind = "gaussian"

    [sweep]
    param = "M"
    values = [400, 600, 800]

    [gamp]              # GampConfig fields
    max_inner_iters = 30

    [em]
    vs_init = 1.0
    beta_init = 0.9
    support_threshold = 1e-3
"""

import sys
from dataclasses import asdict, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .benchmark import ExperimentConfig
from .channel import ChannelParams
from .errors import DomainError
from .gamp import GampConfig
from .priors import SignalPrior
from .sim import NoisyAmplitude, NoisySupport, NoneSI, ScenarioConfig, SlowVarying

__all__ = ["ConfigError", "load_config", "loads_config", "config_to_dict", "dumps_config", "config_from_dict"]

PROTOCOLS = {"none": NoneSI, "noisy_amplitude": NoisyAmplitude,
             "noisy_support": NoisySupport, "slow_varying": SlowVarying}
TOP_KEYS = {"seed", "trials", "threads", "timing", "algorithms", "scenario", "sweep", "gamp", "em"}
SCENARIO_KEYS = {"N", "M", "lam", "v_x", "noise_var", "flip_prob", "side_info"}
SWEEP_KEYS = {"param", "values"}
EM_KEYS = {"vs_init", "beta_init", "support_threshold"}


class ConfigError(DomainError):
    pass


def _check_keys(section, allowed, where):
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _field_names(cls):
    return {f.name for f in fields(cls)}


def _protocol(d):
    d = dict(d)
    kind = d.pop("kind", "none")
    if kind not in PROTOCOLS:
        raise ConfigError(f"unknown side_info kind {kind!r}; choose from {sorted(PROTOCOLS)}")
    cls = PROTOCOLS[kind]
    _check_keys(d, _field_names(cls), f"scenario.side_info ({kind})")
    return cls(**d)


def config_from_dict(d):
    """Build an ExperimentConfig from parsed TOML."""
    _check_keys(d, TOP_KEYS, "top level")
    sc = d.get("scenario", {})
    _check_keys(sc, SCENARIO_KEYS, "scenario")
    base = ScenarioConfig()
    try:
        scenario = ScenarioConfig(
            N=int(sc.get("N", base.N)),
            M=int(sc.get("M", base.M)),
            prior=SignalPrior(sc.get("lam", base.prior.lam), sc.get("v_x", base.prior.v_x)),
            ch=ChannelParams(sc.get("noise_var", base.ch.v), 1.0 - sc.get("flip_prob", 1.0 - base.ch.gamma)),
            si_protocol=_protocol(sc.get("side_info", {})),
            seed=int(d.get("seed", base.seed)),
        )
        sweep = d.get("sweep", {})
        _check_keys(sweep, SWEEP_KEYS, "sweep")
        if ("param" in sweep) != ("values" in sweep):
            raise ConfigError("sweep needs both 'param' and 'values'")
        gamp = d.get("gamp", {})
        _check_keys(gamp, _field_names(GampConfig), "gamp")
        em = d.get("em", {})
        _check_keys(em, EM_KEYS, "em")
        kw = {k: d[k] for k in ("trials", "threads", "timing") if k in d}
        if "algorithms" in d:
            kw["algorithms"] = tuple(d["algorithms"])
        return ExperimentConfig(
            scenario=scenario,
            sweep_param=sweep.get("param"),
            sweep_values=tuple(sweep.get("values", ())),
            gamp_cfg=GampConfig(**gamp),
            **em,
            **kw,
        )
    except ConfigError:
        raise
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def loads_config(text):
    try:
        return config_from_dict(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path):
    return loads_config(Path(path).read_text(encoding="utf-8"))


def config_to_dict(cfg: ExperimentConfig):
    sc = cfg.scenario
    proto = sc.si_protocol
    side = {"kind": proto.kind, **asdict(proto)}
    d = {
        "seed": sc.seed,
        "trials": cfg.trials,
        "threads": cfg.threads,
        "timing": cfg.timing,
        "algorithms": list(cfg.algorithms),
        "scenario": {
            "N": sc.N, "M": sc.M, "lam": sc.prior.lam, "v_x": sc.prior.v_x,
            "noise_var": sc.ch.v, "flip_prob": 1.0 - sc.ch.gamma, "side_info": side,
        },
        "gamp": asdict(cfg.gamp_cfg),
        "em": {"vs_init": cfg.vs_init, "beta_init": cfg.beta_init,
               "support_threshold": cfg.support_threshold},
    }
    if cfg.sweep_param is not None:
        d["sweep"] = {"param": cfg.sweep_param, "values": list(cfg.sweep_values)}
    return d


def dumps_config(cfg: ExperimentConfig):
    return tomli_w.dumps(config_to_dict(cfg))
