"""Command-line driver: price a configured instance, inspect its damping
vector, probe a transform's tail behavior, or run benchmark suites.

Configs are YAML trees with blocks `model`, `payoff`, and optionally
`transform`, `qmc`, `damping`, `output`; unknown keys are rejected.  Exit
codes: 0 ok, 2 invalid config or request, 3 infeasible damping / unavailable
transform rule, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import bench, damping, models, payoffs, pricer, qmc, transform
from .qmc import DEFAULT_SEED

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

_BACKENDS = ("rqmc", "mcfourier", "tplaguerre")


class ConfigError(ValueError):
    """The config file is missing, unparseable, or fails validation."""


@dataclass(frozen=True)
class RunConfig:
    """One validated run: model, payoff, optional overrides, and the
    normalized config tree used for serialization."""

    model: models.ModelSpec
    payoff: payoffs.PayoffSpec
    transform: transform.TransformSpec | None
    eps: float
    N: int
    S: int
    seed: int
    c_alpha: float
    R: np.ndarray | None
    out: str | None
    raw: dict


# ------------------------------------------------------------ config loading

_MODEL_KEYS = {
    "gbm": {"kind", "rate", "horizon", "sigma"},
    "vg": {"kind", "rate", "horizon", "sigma", "theta", "nu"},
    "nig": {"kind", "rate", "horizon", "alpha", "beta", "delta", "Delta"},
    "gh": {"kind", "rate", "horizon", "alpha", "beta", "delta", "Delta",
           "lam"},
}
_PAYOFF_KEYS = {
    "basket_put": {"kind", "spot", "strike", "weights"},
    "spread_call": {"kind", "spot", "strike"},
    "call_on_min": {"kind", "spot", "strike"},
    "cash_digital": {"kind", "spot", "strike", "cash"},
}
_TRANSFORM_KEYS = {"family", "sigmas", "Sigma", "nu", "eps"}
_QMC_KEYS = {"N", "S", "seed", "c_alpha"}
_TOP_KEYS = {"model", "payoff", "transform", "qmc", "damping", "output"}


def _require_block(tree: dict, name: str) -> dict:
    block = tree.get(name)
    if not isinstance(block, dict):
        raise ConfigError(f"config needs a {name!r} mapping block")
    return block


def _reject_unknown(block: dict, allowed: set, where: str):
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _build_model(block: dict) -> models.ModelSpec:
    kind = block.get("kind")
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"model.kind must be one of {sorted(_MODEL_KEYS)}, "
                          f"got {kind!r}")
    _reject_unknown(block, _MODEL_KEYS[kind], "model")
    kwargs = {k: v for k, v in block.items() if k != "kind"}
    try:
        return models.ModelSpec(family=kind, **kwargs)
    except (ValueError, TypeError, np.linalg.LinAlgError) as e:
        raise ConfigError(f"invalid model block: {e}") from e


def _build_payoff(block: dict) -> payoffs.PayoffSpec:
    kind = block.get("kind")
    if kind not in _PAYOFF_KEYS:
        raise ConfigError(
            f"payoff.kind must be one of {sorted(_PAYOFF_KEYS)}, got {kind!r}")
    _reject_unknown(block, _PAYOFF_KEYS[kind], "payoff")
    kwargs = {k: v for k, v in block.items() if k != "kind"}
    try:
        return payoffs.PayoffSpec(kind=kind, **kwargs)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid payoff block: {e}") from e


def _build_transform(block: dict) -> tuple[transform.TransformSpec | None,
                                           float]:
    _reject_unknown(block, _TRANSFORM_KEYS, "transform")
    eps = block.get("eps", 0.0)
    if not isinstance(eps, (int, float)) or eps < 0:
        raise ConfigError("transform.eps must be a nonnegative number")
    family = block.get("family")
    if family is None:
        extra = sorted(set(block) - {"eps"})
        if extra:
            raise ConfigError(
                f"transform parameters {', '.join(extra)} need a family")
        return None, float(eps)
    if "eps" in block:
        raise ConfigError("transform.eps widens the default rule; it cannot "
                          "be combined with an explicit family")
    kwargs = {k: v for k, v in block.items() if k != "family"}
    try:
        return transform.TransformSpec(kind=family, **kwargs), 0.0
    except (ValueError, TypeError, np.linalg.LinAlgError) as e:
        raise ConfigError(f"invalid transform block: {e}") from e


def _build_qmc(block: dict) -> tuple[int, int, int, float]:
    _reject_unknown(block, _QMC_KEYS, "qmc")
    N = block.get("N", 1 << 12)
    S = block.get("S", 30)
    seed = block.get("seed", DEFAULT_SEED)
    c_alpha = block.get("c_alpha", 1.96)
    if not isinstance(N, int) or N < 2:
        raise ConfigError("qmc.N must be an integer >= 2")
    if not isinstance(S, int) or S < 2:
        raise ConfigError("qmc.S must be an integer >= 2")
    if not isinstance(seed, int):
        raise ConfigError("qmc.seed must be an integer")
    if not isinstance(c_alpha, (int, float)) or c_alpha <= 0:
        raise ConfigError("qmc.c_alpha must be positive")
    return N, S, seed, float(c_alpha)


def load_config(path) -> RunConfig:
    """Parse and validate a YAML run config; raises ConfigError."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from e
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    _reject_unknown(tree, _TOP_KEYS, "config")
    model = _build_model(_require_block(tree, "model"))
    payoff = _build_payoff(_require_block(tree, "payoff"))
    if payoff.dim != model.dim:
        raise ConfigError("model and payoff dimensions differ")
    ts, eps = (None, 0.0)
    if "transform" in tree:
        block = tree["transform"]
        if not isinstance(block, dict):
            raise ConfigError("transform block must be a mapping")
        ts, eps = _build_transform(block)
        if ts is not None and ts.dim != model.dim:
            raise ConfigError("transform dimension differs from model")
    N, S, seed, c_alpha = _build_qmc(tree.get("qmc", {}) or {})
    R = None
    damp = tree.get("damping", "auto")
    if damp != "auto":
        try:
            R = np.atleast_1d(np.asarray(damp, dtype=float))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"damping must be \"auto\" or a vector: {e}") \
                from e
        if R.shape != (model.dim,):
            raise ConfigError("damping vector length differs from model")
    out = tree.get("output")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output must be a path string")
    raw = {k: tree[k] for k in
           ("model", "payoff", "transform", "qmc", "damping", "output")
           if k in tree}
    return RunConfig(model=model, payoff=payoff, transform=ts, eps=eps,
                     N=N, S=S, seed=seed, c_alpha=c_alpha, R=R, out=out,
                     raw=raw)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical YAML for a validated config; reloading runs identically."""
    return yaml.safe_dump(cfg.raw, sort_keys=False)


# ------------------------------------------------------------------ printing

def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{float(x):.4g}" for x in np.atleast_1d(v)) + "]"


def _describe_transform(ts: transform.TransformSpec) -> str:
    bits = []
    if ts.sigmas is not None:
        bits.append(f"sigmas={_fmt_vec(ts.sigmas)}")
    if ts.Sigma is not None:
        d = ts.Sigma.shape[0]
        bits.append(f"Sigma={d}x{d}")
    if ts.nu is not None:
        bits.append(f"nu={ts.nu:.4g}")
    return f"{ts.kind}({', '.join(bits)})"


def _resolve(cfg: RunConfig):
    ts = cfg.transform
    if ts is None:
        ts = transform.default_transform(cfg.model, eps=cfg.eps)
    R = cfg.R
    if R is None:
        R = damping.optimize_damping(cfg.model, cfg.payoff).R
    return ts, R


def price_from_config(cfg: RunConfig, backend: str,
                      seed: int | None = None) -> pricer.PriceEstimate:
    """Price the configured instance with the chosen backend."""
    ts, R = _resolve(cfg)
    return _price(cfg, backend, seed, ts, R)


def _price(cfg: RunConfig, backend: str, seed: int | None, ts,
           R) -> pricer.PriceEstimate:
    if backend not in _BACKENDS:
        raise ConfigError(f"backend must be one of {_BACKENDS}")
    eff_seed = cfg.seed if seed is None else seed
    if backend == "rqmc":
        return pricer.price_fourier_rqmc(cfg.model, cfg.payoff, R=R, t=ts,
                                         N=cfg.N, S=cfg.S, seed=eff_seed,
                                         c_alpha=cfg.c_alpha)
    if backend == "mcfourier":
        return pricer.price_fourier_mc(cfg.model, cfg.payoff, R=R, t=ts,
                                       N_total=cfg.N * cfg.S, seed=eff_seed,
                                       c_alpha=cfg.c_alpha)
    return pricer.price_tp_laguerre(cfg.model, cfg.payoff, R=R)


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")


def _write_price_row(cfg: RunConfig, est, backend: str, seed: int,
                     instance_id: str, out_dir: str | None) -> Path:
    if out_dir is not None:
        dest = Path(out_dir)
        dest.mkdir(parents=True, exist_ok=True)
        path = dest / f"{instance_id}__{backend}__{_utc_stamp()}.csv"
    else:
        path = Path(cfg.out)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
    row = dict(instance_id=instance_id, backend=backend,
               model=cfg.model.family, payoff=cfg.payoff.kind,
               d=cfg.model.dim, N=est.N, S=est.S, estimate=est.price,
               stat_error=est.stat_error, rel_error=est.rel_stat_error,
               reference=None, reference_source=None, wall_ms=est.wall_ms,
               seed=seed, slope=None)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(bench.CSV_COLUMNS)
        w.writerow([bench._format_cell(row[c]) for c in bench.CSV_COLUMNS])
    return path


# ------------------------------------------------------------------ commands

def cmd_price(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    ts, R = _resolve(cfg)
    est = _price(cfg, args.backend, seed, ts, R)
    if not math.isfinite(est.price):
        raise ArithmeticError(f"price is not finite: {est.price}")
    tdesc = _describe_transform(ts) if args.backend != "tplaguerre" \
        else "none"
    print(f"price={est.price:.10g} abs_err={est.stat_error:.4g} "
          f"rel_err={est.rel_stat_error:.4g} R={_fmt_vec(R)} "
          f"transform={tdesc} backend={args.backend} N={est.N} S={est.S} "
          f"seed={seed} wall_ms={est.wall_ms:.4g}")
    if args.out is not None or cfg.out is not None:
        instance_id = Path(args.config).stem
        path = _write_price_row(cfg, est, args.backend, seed, instance_id,
                                args.out)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_damping(args) -> int:
    cfg = load_config(args.config)
    res = damping.optimize_damping(cfg.model, cfg.payoff)
    print(f"R={_fmt_vec(res.R)} objective={res.objective:.10g} "
          f"margin={res.margin:.4g} converged={res.converged}")
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg = load_config(args.config)
    ts, R = _resolve(cfg)
    report = transform.boundary_probe(cfg.model, cfg.payoff, R, t=ts)
    print(f"transform={_describe_transform(ts)} R={_fmt_vec(R)} "
          f"rays={report.magnitudes.shape[0]}")
    print("level      max_ratio")
    worst = report.magnitudes.max(axis=0)
    for lvl, mag in zip(report.levels, worst):
        print(f"{lvl:<10.0e} {mag:.6g}")
    print(f"verdict: {report.verdict}")
    return EXIT_OK


def cmd_bench(args) -> int:
    out = args.out if args.out is not None else "bench-out"
    seed = DEFAULT_SEED if args.seed is None else args.seed
    try:
        paths = bench.run_suite(args.suite, out, seed=seed)
    except KeyError as e:
        print(f"error[UnknownSuite]: {e.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fourierqmc",
        description="Fourier-domain option pricing with randomized QMC")
    sub = ap.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", help="price one configured instance")
    price.add_argument("--config", required=True)
    price.add_argument("--backend", choices=_BACKENDS, default="rqmc")
    price.add_argument("--out", default=None,
                       help="directory for a CSV row of the result")
    price.add_argument("--seed", type=int, default=None)

    damp = sub.add_parser("damping", help="print the optimized damping vector")
    damp.add_argument("--config", required=True)

    probe = sub.add_parser("probe", help="tabulate transform tail growth")
    probe.add_argument("--config", required=True)

    bench_p = sub.add_parser("bench", help="run a named experiment suite")
    bench_p.add_argument("--suite", required=True)
    bench_p.add_argument("--out", default=None)
    bench_p.add_argument("--seed", type=int, default=None)
    return ap


_COMMANDS = {"price": cmd_price, "damping": cmd_damping, "probe": cmd_probe,
             "bench": cmd_bench}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error[ConfigError]: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except pricer.DimensionTooLarge as e:
        print(f"error[DimensionTooLarge]: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (damping.InfeasibleRegion, transform.RuleUnavailable,
            models.StripViolation) as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (qmc.NonFiniteIntegrand, ArithmeticError, FloatingPointError) as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
