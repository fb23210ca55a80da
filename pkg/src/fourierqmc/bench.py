"""Experiment harness: a catalog of named pricing problems, convergence curves
with fitted error-decay slopes, runtime-to-tolerance tables, and CSV artifacts.

Conventions shared by every run:
  * rel errors are statistical errors divided by |reference price|;
  * wall times are medians over `reps` repetitions; runtime-to-tolerance
    rows report the cumulative escalation time up to the accepting step,
    which keeps wall time nondecreasing as the tolerance tightens;
  * the mcfourier backend spends the same N*S sample budget per grid point
    as the rqmc backend, so both share one cost axis.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _sobolnp, damping, models, payoffs, pricer, qmc, reference, \
    transform
from .qmc import DEFAULT_SEED

CSV_COLUMNS = ("instance_id", "backend", "model", "payoff", "d", "N", "S",
               "estimate", "stat_error", "rel_error", "reference",
               "reference_source", "wall_ms", "seed", "slope")
_INT_COLUMNS = frozenset({"d", "N", "S", "seed"})
_STR_COLUMNS = frozenset({"instance_id", "backend", "model", "payoff",
                          "reference_source"})

CONVERGENCE_BACKENDS = ("rqmc", "mcfourier")
RUNTIME_BACKENDS = ("rqmc", "mcfourier", "tplaguerre", "mcphysical")

# reference prices draw from their own seed so the mcphysical backend,
# which uses the caller's seed, never shares a stream with its reference
_REFERENCE_SEED = 909090

_DEFAULT_GRID = tuple(1 << k for k in range(6, 14))
_TP_NODE_LADDER = (4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128)


class BudgetExceeded(RuntimeError):
    """A stopping rule hit its point budget; .partial holds finished rows."""

    def __init__(self, message: str, partial: "RuntimeToTolerance"):
        super().__init__(message)
        self.partial = partial


# ----------------------------------------------------------------- instances

@dataclass(frozen=True)
class Instance:
    """A named pricing problem: model plus payoff, with an optional transform
    override (None selects the model's default rule)."""

    instance_id: str
    model: models.ModelSpec
    payoff: payoffs.PayoffSpec
    transform: transform.TransformSpec | None = None
    note: str = ""

    def __post_init__(self):
        if self.payoff.dim != self.model.dim:
            raise ValueError("model and payoff dimensions differ")
        if self.transform is not None \
                and self.transform.dim != self.model.dim:
            raise ValueError("transform dimension differs from model")

    @property
    def dim(self) -> int:
        return self.model.dim


def _corr_cov(vol: float, d: int, rho: float) -> np.ndarray:
    C = np.full((d, d), rho)
    np.fill_diagonal(C, 1.0)
    return C * vol ** 2


def _banded_corr_cov(vol: float, d: int) -> np.ndarray:
    # correlation 0.2 / (1 + 0.1 |i - j|) off the diagonal
    i = np.arange(d)
    C = 0.2 / (1.0 + 0.1 * np.abs(i[:, None] - i[None, :]))
    np.fill_diagonal(C, 1.0)
    return C * vol ** 2


def instance_catalog() -> dict[str, Instance]:
    """Built-in benchmark problems addressable by id; rebuilt on each call."""
    out: dict[str, Instance] = {}

    def add(iid, model, payoff, t=None, note=""):
        out[iid] = Instance(iid, model, payoff, t, note)

    def atm_put(d, w=None):
        w = np.full(d, 1.0 / d) if w is None else w
        return payoffs.PayoffSpec("basket_put", spot=np.full(d, 100.0),
                                  strike=100.0, weights=w)

    gbm1 = models.ModelSpec("gbm", rate=0.0, horizon=1.0, sigma=[[0.04]])
    put1 = atm_put(1, w=[1.0])
    add("gbm1d-put", gbm1, put1,
        note="ATM lognormal put, critical Gaussian proposal scale 5")
    add("gbm1d-put-sig1", gbm1, put1,
        transform.TransformSpec(kind="gaussian_product", sigmas=[1.0]),
        note="same put under a deliberately narrow unit-scale proposal")

    min2 = payoffs.PayoffSpec("call_on_min", spot=[100.0, 100.0],
                              strike=100.0)
    gbm2_00 = models.ModelSpec("gbm", 0.0, 1.0, sigma=np.eye(2) * 0.04)
    gbm2_07 = models.ModelSpec("gbm", 0.0, 1.0, sigma=_corr_cov(0.2, 2, 0.7))
    uni5 = transform.TransformSpec(kind="gaussian_product",
                                   sigmas=[5.0, 5.0])
    add("gbm2d-min-rho00", gbm2_00, min2,
        note="2-asset call-on-min, independent assets")
    add("gbm2d-min-rho07-uni", gbm2_07, min2, uni5,
        note="correlated assets priced with the per-axis proposal rule")
    add("gbm2d-min-rho07-mat", gbm2_07, min2,
        note="correlated assets with the full inverse-covariance proposal")

    gh1 = models.ModelSpec("gh", 0.0, 1.0, alpha=20.0, beta=[-3.0],
                           delta=0.2, Delta=[[1.0]], lam=1.0)
    add("gh1d-put", gh1, put1,
        note="hyperbolic-family put, critical Laplace proposal scale 5")
    add("gh1d-put-sig1", gh1, put1,
        transform.TransformSpec(kind="laplace_product", sigmas=[1.0]),
        note="same put under a unit-scale Laplace proposal")

    vg1 = models.ModelSpec("vg", 0.0, 1.0, sigma=[[0.04]], theta=[-0.3],
                           nu=0.1)
    crit1 = transform.default_transform(vg1)
    add("vg1d-put", vg1, put1,
        note="variance-gamma put, critical Student proposal")
    add("vg1d-put-sig1", vg1, put1,
        transform.TransformSpec(kind="student_product", sigmas=[1.0],
                                nu=crit1.nu),
        note="same put with the proposal scale shrunk to 1")

    vg2 = models.ModelSpec("vg", 0.0, 1.0, sigma=[[0.04]], theta=[-0.3],
                           nu=0.2)
    crit2 = transform.default_transform(vg2)
    add("vg1d-put-nu02", vg2, put1,
        note="variance-gamma put at the critical Student tail index")
    add("vg1d-put-heavy", vg2, put1,
        transform.TransformSpec(kind="student_product", sigmas=crit2.sigmas,
                                nu=2.0 * crit2.nu),
        note="tail index doubled at unchanged scale")

    vg6 = models.ModelSpec("vg", 0.0, 1.0, sigma=_banded_corr_cov(0.4, 6),
                           theta=np.full(6, -0.3), nu=0.1)
    add("vg6d-digital", vg6,
        payoffs.PayoffSpec("cash_digital", spot=np.full(6, 100.0),
                           strike=100.0, cash=100.0),
        note="6-asset cash-or-nothing call on correlated variance-gamma")
    add("vg6d-min", vg6,
        payoffs.PayoffSpec("call_on_min", spot=np.full(6, 100.0),
                           strike=100.0),
        note="6-asset call-on-min on correlated variance-gamma")

    nig3 = models.ModelSpec("nig", 0.0, 1.0, alpha=10.0,
                            beta=np.full(3, -3.0), delta=0.2,
                            Delta=np.eye(3))
    add("nig3d-basket", nig3, atm_put(3),
        note="3-asset equally weighted basket put, inverse-Gaussian mixing")
    add("nig3d-spread", nig3,
        payoffs.PayoffSpec("spread_call", spot=[100.0, 100.0 / 3, 100.0 / 3],
                           strike=100.0 / 3),
        note="3-asset spread call, inverse-Gaussian mixing")

    add("gbm4d-basket",
        models.ModelSpec("gbm", 0.0, 1.0, sigma=np.eye(4) * 0.04),
        atm_put(4), note="4-asset lognormal basket put")
    add("vg4d-basket",
        models.ModelSpec("vg", 0.0, 1.0, sigma=np.eye(4) * 0.16,
                         theta=np.full(4, -0.3), nu=0.2),
        atm_put(4), note="4-asset variance-gamma basket put")
    add("nig4d-basket",
        models.ModelSpec("nig", 0.0, 1.0, alpha=20.0, beta=np.full(4, -3.0),
                         delta=0.2, Delta=np.eye(4)),
        atm_put(4), note="4-asset normal-inverse-Gaussian basket put")
    return out


def get_instance(instance_id: str) -> Instance:
    cat = instance_catalog()
    if instance_id not in cat:
        known = ", ".join(sorted(cat))
        raise KeyError(
            f"unknown instance {instance_id!r}; available: {known}")
    return cat[instance_id]


# ---------------------------------------------------------------- references

_REF_CACHE: dict[tuple[str, int], tuple[float, str]] = {}


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _closed_form(inst: Instance) -> float | None:
    """Lognormal single-asset values; None when no closed form applies."""
    m, p = inst.model, inst.payoff
    if m.family != "gbm" or m.dim != 1:
        return None
    sig = math.sqrt(float(m.sigma[0, 0]))
    T, r = m.horizon, m.rate
    srt = sig * math.sqrt(T)
    disc = math.exp(-r * T)
    if p.kind == "cash_digital":
        spot, k = float(p.spot[0]), float(p.strike[0])
        d2 = (math.log(spot / k) + (r - 0.5 * sig * sig) * T) / srt
        return disc * p.cash * _norm_cdf(d2)
    if p.kind == "basket_put":
        spot, k = float(p.weights[0] * p.spot[0]), float(p.strike)
    elif p.kind == "call_on_min":
        spot, k = float(p.spot[0]), float(p.strike)
    else:
        return None
    d1 = (math.log(spot / k) + (r + 0.5 * sig * sig) * T) / srt
    d2 = d1 - srt
    call = spot * _norm_cdf(d1) - k * disc * _norm_cdf(d2)
    if p.kind == "basket_put":
        return call - spot + k * disc
    return call


def reference_price(inst: Instance, mc_paths: int = 10 ** 7,
                    seed: int = _REFERENCE_SEED) -> tuple[float, str]:
    """Reference value and its source, following the hierarchy: closed form,
    then d <= 2 tensor quadrature at 64 nodes, then physical Monte Carlo."""
    key = (inst.instance_id, mc_paths)
    if key in _REF_CACHE:
        return _REF_CACHE[key]
    cf = _closed_form(inst)
    if cf is not None:
        val = (float(cf), "closed_form")
    elif inst.dim <= 2:
        est = pricer.price_tp_laguerre(inst.model, inst.payoff, n_nodes=64)
        val = (float(est.price), "tplaguerre_n64")
    else:
        est = reference.mc_price_physical(inst.model, inst.payoff, mc_paths,
                                          seed, allow_gig=True)
        val = (float(est.price), f"mcphysical_M{mc_paths}")
    if not math.isfinite(val[0]) or val[0] == 0.0:
        raise ArithmeticError(
            f"degenerate reference for {inst.instance_id}: {val[0]}")
    _REF_CACHE[key] = val
    return val


# ----------------------------------------------------------------- slope fit

def fit_slope(N_grid, rel_errors, points: int = 5) -> tuple[float, float]:
    """Least-squares slope and intercept of log2(rel error) vs log2(N) on the
    trailing `points` grid entries (all of them when the grid is shorter)."""
    N = np.asarray(N_grid, dtype=float)
    e = np.asarray(rel_errors, dtype=float)
    if N.ndim != 1 or N.shape != e.shape or N.size < 2:
        raise ValueError("need matching 1-d grids with at least two points")
    k = min(points, N.size)
    x = np.log2(N[-k:])
    y = np.log2(e[-k:])
    A = np.column_stack([x, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(sol[0]), float(sol[1])


def _check_grid(N_grid) -> tuple[int, ...]:
    N = tuple(int(n) for n in np.atleast_1d(np.asarray(N_grid)).tolist())
    if not N:
        raise ValueError("empty N grid")
    for n in N:
        if n < 2 or n & (n - 1):
            raise ValueError(f"N grid entries must be powers of two, got {n}")
    if any(b <= a for a, b in zip(N, N[1:])):
        raise ValueError("N grid must be strictly increasing")
    return N


def _median_wall(fn, reps: int):
    walls = []
    res = None
    for _ in range(reps):
        t0 = time.perf_counter()
        res = fn()
        walls.append((time.perf_counter() - t0) * 1e3)
    return res, float(statistics.median(walls))


# --------------------------------------------------------------- convergence

@dataclass(frozen=True)
class ConvergenceRun:
    """Error-vs-N record for one instance and backend, plus the fitted rate."""

    instance_id: str
    backend: str
    model: str
    payoff: str
    d: int
    S: int
    seed: int
    N_grid: tuple[int, ...]
    values: tuple[float, ...]
    stat_errors: tuple[float, ...]
    rel_stat_errors: tuple[float, ...]
    wall_ms: tuple[float, ...]
    slope: float
    intercept: float
    reference: float
    reference_source: str

    def __post_init__(self):
        object.__setattr__(self, "N_grid", _check_grid(self.N_grid))
        k = len(self.N_grid)
        for name in ("values", "stat_errors", "rel_stat_errors", "wall_ms"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != k:
                raise ValueError(f"{name} length does not match the N grid")
            object.__setattr__(self, name, v)
        if not math.isfinite(self.slope):
            raise ArithmeticError("fitted slope is not finite")


def run_convergence(instance: Instance, backend: str,
                    N_grid=_DEFAULT_GRID, S: int = 30,
                    seed: int = DEFAULT_SEED, reps: int = 3,
                    mc_paths: int = 10 ** 7) -> ConvergenceRun:
    """Price `instance` across the N grid and fit the error-decay rate."""
    if backend not in CONVERGENCE_BACKENDS:
        raise ValueError(
            f"backend must be one of {CONVERGENCE_BACKENDS}, got {backend!r}")
    grid = _check_grid(N_grid)
    if reps < 1:
        raise ValueError("need reps >= 1")
    ref, src = reference_price(instance, mc_paths=mc_paths)
    Rv = damping.optimize_damping(instance.model, instance.payoff).R
    ts = instance.transform
    vals, stats_, rels, walls = [], [], [], []
    for n in grid:
        if backend == "rqmc":
            def price():
                return pricer.price_fourier_rqmc(
                    instance.model, instance.payoff, R=Rv, t=ts, N=n, S=S,
                    seed=seed)
        else:
            def price():
                return pricer.price_fourier_mc(
                    instance.model, instance.payoff, R=Rv, t=ts,
                    N_total=n * S, seed=seed)
        est, wall = _median_wall(price, reps)
        vals.append(est.price)
        stats_.append(est.stat_error)
        rels.append(est.stat_error / abs(ref))
        walls.append(wall)
    slope, intercept = fit_slope(grid, rels)
    return ConvergenceRun(
        instance_id=instance.instance_id, backend=backend,
        model=instance.model.family, payoff=instance.payoff.kind,
        d=instance.dim, S=S, seed=seed, N_grid=grid, values=tuple(vals),
        stat_errors=tuple(stats_), rel_stat_errors=tuple(rels),
        wall_ms=tuple(walls), slope=slope, intercept=intercept,
        reference=ref, reference_source=src)


# ---------------------------------------------------------- runtime to tol

@dataclass(frozen=True)
class TolRow:
    backend: str
    tol: float
    N: int
    S: int
    estimate: float
    stat_error: float
    rel_error: float
    wall_ms: float
    stopping_rule: str


@dataclass(frozen=True)
class RuntimeToTolerance:
    """Cumulative escalation wall time per tolerance level, per backend."""

    instance_id: str
    model: str
    payoff: str
    d: int
    seed: int
    backends: tuple[str, ...]
    tol_grid: tuple[float, ...]
    reference: float
    reference_source: str
    rows: tuple[TolRow, ...]

    def __post_init__(self):
        for b in self.backends:
            rows = [r for r in self.rows if r.backend == b]
            for r1, r2 in zip(rows, rows[1:]):
                if r2.tol >= r1.tol:
                    raise ValueError("rows must tighten tol per backend")
                if r2.wall_ms < r1.wall_ms:
                    raise ValueError(
                        "wall time must be nondecreasing as tol decreases")
            for r in rows:
                if not r.rel_error <= r.tol:
                    raise ValueError("achieved error exceeds its tol")


def run_runtime_to_tol(instance: Instance, backends, TOL_grid,
                       seed: int = DEFAULT_SEED, S: int = 30, reps: int = 3,
                       max_points: int = 1 << 23,
                       mc_paths: int = 10 ** 7) -> RuntimeToTolerance:
    """Escalate each backend until its error rule meets every tolerance.

    Sampling backends double their point count until the statistical error
    over |reference| drops to TOL; the tensor quadrature refines its node
    ladder until the exact relative error does. Rows record the cumulative
    escalation wall time, so times are nondecreasing as TOL tightens.
    """
    if isinstance(backends, str):
        backends = (backends,)
    backends = tuple(backends)
    for b in backends:
        if b not in RUNTIME_BACKENDS:
            raise ValueError(
                f"backend must be one of {RUNTIME_BACKENDS}, got {b!r}")
    tols = tuple(float(t) for t in TOL_grid)
    if not tols or any(t <= 0 for t in tols):
        raise ValueError("TOL grid must be positive")
    if any(b >= a for a, b in zip(tols, tols[1:])):
        raise ValueError("TOL grid must be strictly decreasing")
    if reps < 1:
        raise ValueError("need reps >= 1")
    ref, src = reference_price(instance, mc_paths=mc_paths)
    aref = abs(ref)
    Rv = damping.optimize_damping(instance.model, instance.payoff).R
    ts = instance.transform
    rows: list[TolRow] = []

    def result() -> RuntimeToTolerance:
        return RuntimeToTolerance(
            instance_id=instance.instance_id, model=instance.model.family,
            payoff=instance.payoff.kind, d=instance.dim, seed=seed,
            backends=backends, tol_grid=tols, reference=ref,
            reference_source=src, rows=tuple(rows))

    def bail(msg: str):
        raise BudgetExceeded(msg, result())

    for b in backends:
        cum = 0.0
        if b == "tplaguerre":
            rule = "refine_nodes_until_rel_exact_le_tol"
            idx, cur_rel, est, total = 0, math.inf, None, 0
            for tol in tols:
                while cur_rel > tol:
                    if idx >= len(_TP_NODE_LADDER):
                        bail(f"node ladder exhausted before tol {tol}")
                    n = _TP_NODE_LADDER[idx]
                    total = (2 * n) ** instance.dim
                    if total > max_points:
                        bail(f"{total} nodes exceed the {max_points} budget")
                    est, wall = _median_wall(
                        lambda: pricer.price_tp_laguerre(
                            instance.model, instance.payoff, R=Rv,
                            n_nodes=n), reps)
                    cum += wall
                    cur_rel = abs(est.price - ref) / aref
                    idx += 1
                rows.append(TolRow(b, tol, total, 1, est.price, 0.0,
                                   cur_rel, cum, rule))
            continue
        if b == "rqmc":
            rule = "double_n_until_rel_stat_le_tol"
            n, row_S = 64, S

            def price(k):
                return pricer.price_fourier_rqmc(
                    instance.model, instance.payoff, R=Rv, t=ts, N=k, S=S,
                    seed=seed)
        elif b == "mcfourier":
            rule = "double_total_until_rel_stat_le_tol"
            n, row_S = 1024, 1

            def price(k):
                return pricer.price_fourier_mc(
                    instance.model, instance.payoff, R=Rv, t=ts, N_total=k,
                    seed=seed)
        else:
            rule = "double_paths_until_rel_stat_le_tol"
            n, row_S = 1024, 1

            def price(k):
                return reference.mc_price_physical(
                    instance.model, instance.payoff, k, seed, allow_gig=True)
        est, cur_rel = None, math.inf
        for tol in tols:
            while cur_rel > tol:
                if est is not None:
                    n *= 2
                if n > max_points:
                    bail(f"{b} needs more than {max_points} points "
                         f"for tol {tol}")
                est, wall = _median_wall(lambda: price(n), reps)
                cum += wall
                cur_rel = est.stat_error / aref
            rows.append(TolRow(b, tol, n, row_S, est.price, est.stat_error,
                               cur_rel, cum, rule))
    return result()


# -------------------------------------------------------------- sobol kernels

@dataclass(frozen=True)
class SobolBenchRow:
    backend: str
    N: int
    d: int
    wall_ms: float


@dataclass(frozen=True)
class SobolBench:
    """Wall-time comparison of the low-discrepancy point kernels; `identical`
    is True when both kernels emit bit-identical points (None if only one
    kernel is importable)."""

    rows: tuple[SobolBenchRow, ...]
    identical: bool | None


def sobol_kernel_bench(N: int = 1 << 14, d: int = 8,
                       reps: int = 3) -> SobolBench:
    dirs = qmc._direction_table(d)
    shift = np.zeros(d, dtype=np.uint64)
    kernels = [("numpy", _sobolnp.sobol_fill)]
    if qmc.BACKEND == "compiled":
        from . import _sobolkernel
        kernels.append(("compiled", _sobolkernel.sobol_fill))
    outs: dict[str, np.ndarray] = {}
    rows = []
    for name, fill in kernels:
        buf = np.empty((N, d), dtype=np.float64)
        _, wall = _median_wall(lambda: fill(dirs, shift, 0, buf), reps)
        outs[name] = buf.copy()
        rows.append(SobolBenchRow(name, N, d, wall))
    identical = None
    if len(outs) == 2:
        identical = bool(np.array_equal(outs["numpy"], outs["compiled"]))
    return SobolBench(tuple(rows), identical)


# ----------------------------------------------------------------------- CSV

def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _rows_convergence(run: ConvergenceRun) -> list[dict]:
    base = dict(instance_id=run.instance_id, backend=run.backend,
                model=run.model, payoff=run.payoff, d=run.d, seed=run.seed,
                reference=run.reference,
                reference_source=run.reference_source)
    rows = []
    for n, v, s, r, w in zip(run.N_grid, run.values, run.stat_errors,
                             run.rel_stat_errors, run.wall_ms):
        rows.append({**base, "N": n, "S": run.S, "estimate": v,
                     "stat_error": s, "rel_error": r, "wall_ms": w,
                     "slope": None})
    rows.append({**base, "N": None, "S": None, "estimate": None,
                 "stat_error": None, "rel_error": None, "wall_ms": None,
                 "slope": run.slope})
    return rows


def _row_tol(run: RuntimeToTolerance, r: TolRow) -> dict:
    return dict(instance_id=run.instance_id, backend=r.backend,
                model=run.model, payoff=run.payoff, d=run.d, N=r.N, S=r.S,
                estimate=r.estimate, stat_error=r.stat_error,
                rel_error=r.rel_error, reference=run.reference,
                reference_source=run.reference_source, wall_ms=r.wall_ms,
                seed=run.seed, slope=None)


def _row_sobol(r: SobolBenchRow) -> dict:
    return dict(instance_id="sobol-kernel", backend=r.backend, model=None,
                payoff=None, d=r.d, N=r.N, S=None, estimate=None,
                stat_error=None, rel_error=None, reference=None,
                reference_source=None, wall_ms=r.wall_ms, seed=None,
                slope=None)


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")


def write_csv(run, out_dir, timestamp: str | None = None) -> tuple[Path, ...]:
    """Persist a run under <instance_id>__<backend>__<timestamp>.csv, one
    file per backend present; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = timestamp or _utc_stamp()
    groups: list[tuple[str, str, list[dict]]] = []
    if isinstance(run, ConvergenceRun):
        groups.append((run.instance_id, run.backend, _rows_convergence(run)))
    elif isinstance(run, RuntimeToTolerance):
        for b in run.backends:
            rows = [_row_tol(run, r) for r in run.rows if r.backend == b]
            if rows:
                groups.append((run.instance_id, b, rows))
    elif isinstance(run, SobolBench):
        for r in run.rows:
            groups.append(("sobol-kernel", r.backend, [_row_sobol(r)]))
    else:
        raise TypeError(f"cannot serialize {type(run).__name__}")
    paths = []
    for iid, b, rows in groups:
        path = out / f"{iid}__{b}__{stamp}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in rows:
                w.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])
        paths.append(path)
    return tuple(paths)


def read_csv(path) -> list[dict]:
    """Read a bench CSV back into typed rows; empty cells become None."""
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd, ()))
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header!r}")
        rows = []
        for rec in rd:
            if len(rec) != len(CSV_COLUMNS):
                raise ValueError(f"row has {len(rec)} cells, "
                                 f"expected {len(CSV_COLUMNS)}")
            row = {}
            for name, cell in zip(CSV_COLUMNS, rec):
                if cell == "":
                    row[name] = None
                elif name in _STR_COLUMNS:
                    row[name] = cell
                elif name in _INT_COLUMNS:
                    row[name] = int(cell)
                else:
                    row[name] = float(cell)
            rows.append(row)
    return rows


# -------------------------------------------------------------------- suites

_SUITES: dict[str, tuple] = {
    "fig4": ("convergence",
             (("gbm1d-put-sig1", "rqmc"), ("gbm1d-put", "rqmc"))),
    "fig3": ("convergence",
             (("gbm2d-min-rho00", "rqmc"), ("gbm2d-min-rho07-uni", "rqmc"))),
    "rho-rule": ("convergence", (("gbm2d-min-rho07-uni", "rqmc"),
                                 ("gbm2d-min-rho07-mat", "rqmc"))),
    "mc-rate": ("convergence",
                (("gbm1d-put", "rqmc"), ("gbm1d-put", "mcfourier"))),
    "mc4d": ("convergence",
             tuple((iid, b)
                   for iid in ("gbm4d-basket", "vg4d-basket", "nig4d-basket")
                   for b in ("rqmc", "mcfourier"))),
    "runtime6d": ("runtime", ("vg6d-digital", ("rqmc", "mcphysical"))),
    "sobol": ("kernel", None),
}


def suite_ids() -> tuple[str, ...]:
    return tuple(sorted(_SUITES))


def run_suite(suite_id: str, out_dir, seed: int = DEFAULT_SEED,
              N_grid=_DEFAULT_GRID, S: int = 30, reps: int = 3,
              mc_paths: int = 10 ** 7, tol_grid=(1e-1, 1e-2),
              timestamp: str | None = None) -> tuple[Path, ...]:
    """Run a named experiment suite; persists one CSV per instance/backend."""
    if suite_id not in _SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; "
                       f"available: {', '.join(suite_ids())}")
    kind, items = _SUITES[suite_id]
    stamp = timestamp or _utc_stamp()
    paths: list[Path] = []
    if kind == "convergence":
        for iid, backend in items:
            run = run_convergence(get_instance(iid), backend, N_grid=N_grid,
                                  S=S, seed=seed, reps=reps,
                                  mc_paths=mc_paths)
            paths += write_csv(run, out_dir, stamp)
    elif kind == "runtime":
        iid, backends = items
        run = run_runtime_to_tol(get_instance(iid), backends, tol_grid,
                                 seed=seed, S=S, reps=reps,
                                 mc_paths=mc_paths)
        paths += write_csv(run, out_dir, stamp)
    else:
        paths += write_csv(sobol_kernel_bench(reps=reps), out_dir, stamp)
    return tuple(paths)
