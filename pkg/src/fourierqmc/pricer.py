"""End-to-end Fourier pricing with three interchangeable backends.

RQMC averages the cube-transformed integrand over digitally shifted Sobol
sets; MCFourier averages the same integrand over i.i.d. uniforms; TPLaguerre
tensorizes folded half-line Gauss-Laguerre rules directly in frequency space.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import damping, models, payoffs, qmc, transform

DEFAULT_SEED = qmc.DEFAULT_SEED


class DimensionTooLarge(ValueError):
    """Tensor-product quadrature cost n^d rules out this dimension."""


@dataclass(frozen=True)
class PriceEstimate:
    price: float
    stat_error: float
    rel_stat_error: float
    backend: str
    N: int
    S: int
    seed: int
    wall_ms: float


def _wrap(price: float, stat: float, backend: str, N: int, S: int, seed: int,
          start: float) -> PriceEstimate:
    if price != 0.0:
        rel = stat / abs(price)
    else:
        rel = 0.0 if stat == 0.0 else math.inf
    wall = (time.perf_counter() - start) * 1e3
    return PriceEstimate(price=price, stat_error=stat, rel_stat_error=rel,
                         backend=backend, N=N, S=S, seed=seed, wall_ms=wall)


def _resolve_damping(model: models.ModelSpec, payoff: payoffs.PayoffSpec,
                     R) -> np.ndarray:
    if R is None:
        return damping.optimize_damping(model, payoff).R
    return np.asarray(R, dtype=float)


def _fourier_integrand(model: models.ModelSpec, payoff: payoffs.PayoffSpec,
                       R: np.ndarray):
    """Real-valued damped integrand on frequency space R^d (no transform)."""
    if payoff.dim != model.dim:
        raise ValueError("model and payoff dimensions differ")
    if not models.in_strip(model, R) or not payoffs.in_strip(payoff, R):
        raise models.StripViolation("damping vector outside the joint strip")
    x0, unscale = payoffs.scaling_rule(payoff)
    mu = models.drift_correction(model)
    shift = x0 + (model.rate + mu) * model.horizon
    log_pref = math.log(unscale) - model.dim * math.log(2.0 * math.pi) \
        - model.rate * model.horizon

    def g(y):
        z = np.atleast_2d(np.asarray(y, dtype=float)) + 1j * R
        lg = models.log_char(model, z) + 1j * (z @ shift) \
            + payoffs.log_payoff_transform(payoff, z)
        with np.errstate(over="ignore"):
            return np.exp(lg.real + log_pref) * np.cos(lg.imag)

    return g


def price_fourier_rqmc(model: models.ModelSpec, payoff: payoffs.PayoffSpec,
                       R=None, t: transform.TransformSpec | None = None,
                       N: int = 1 << 12, S: int = 30,
                       seed: int = DEFAULT_SEED,
                       c_alpha: float = 1.96) -> PriceEstimate:
    start = time.perf_counter()
    Rv = _resolve_damping(model, payoff, R)
    ts = t if t is not None else transform.default_transform(model)
    f = transform.transformed_integrand(model, payoff, Rv, ts)
    est = qmc.rqmc_estimate(f, ts.udim, N, S, seed, c_alpha)
    return _wrap(est.value, est.stderr, "RQMC", N, S, seed, start)


def price_fourier_mc(model: models.ModelSpec, payoff: payoffs.PayoffSpec,
                     R=None, t: transform.TransformSpec | None = None,
                     N_total: int = (1 << 12) * 30, seed: int = DEFAULT_SEED,
                     c_alpha: float = 1.96) -> PriceEstimate:
    """Plain Monte Carlo on the same cube integrand, for rate comparisons."""
    start = time.perf_counter()
    if N_total < 2:
        raise ValueError("need N_total >= 2")
    Rv = _resolve_damping(model, payoff, R)
    ts = t if t is not None else transform.default_transform(model)
    f = transform.transformed_integrand(model, payoff, Rv, ts)
    rng = np.random.Generator(np.random.Philox(key=[seed, 2 ** 63]))
    u = rng.random((N_total, ts.udim))
    vals = np.asarray(f(u), dtype=float)
    if not np.all(np.isfinite(vals)):
        i = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise qmc.NonFiniteIntegrand(
            f"non-finite integrand value at u={u[i].tolist()}")
    price = float(vals.mean())
    stat = float(c_alpha * vals.std(ddof=1) / math.sqrt(N_total))
    return _wrap(price, stat, "MCFourier", N_total, 1, seed, start)


_LAGUERRE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for weight e^{-x} on [0, inf), cached per n."""
    if n not in _LAGUERRE_CACHE:
        x, w = np.polynomial.laguerre.laggauss(n)
        _LAGUERRE_CACHE[n] = (x, w)
    return _LAGUERRE_CACHE[n]


def tp_laguerre_integrate(f, d: int, n_nodes: int,
                          chunk: int = 1 << 18) -> float:
    """Integral of f over R^d: each axis folds to the half line and gets an
    n-node Gauss-Laguerre rule; evaluation is chunked to bound memory."""
    x, w = gauss_laguerre(n_nodes)
    with np.errstate(over="raise"):
        half_w = w * np.exp(x)  # e^{+x} undoes the rule's e^{-x} weight
    nodes = np.concatenate([x, -x])
    wts = np.concatenate([half_w, half_w])
    m = nodes.size
    total = m ** d
    acc = 0.0
    for begin in range(0, total, chunk):
        idx = np.arange(begin, min(begin + chunk, total), dtype=np.int64)
        pts = np.empty((idx.size, d))
        wt = np.ones(idx.size)
        rem = idx
        for k in range(d - 1, -1, -1):
            digit = rem % m
            rem = rem // m
            pts[:, k] = nodes[digit]
            wt *= wts[digit]
        acc += float(wt @ np.asarray(f(pts), dtype=float))
    return acc


def price_tp_laguerre(model: models.ModelSpec, payoff: payoffs.PayoffSpec,
                      R=None, n_nodes: int = 64) -> PriceEstimate:
    start = time.perf_counter()
    d = model.dim
    if d > 5:
        raise DimensionTooLarge(
            f"tensor-product quadrature not offered beyond d=5 (got {d})")
    Rv = _resolve_damping(model, payoff, R)
    g = _fourier_integrand(model, payoff, Rv)
    price = tp_laguerre_integrate(g, d, n_nodes)
    return _wrap(price, 0.0, "TPLaguerre", (2 * n_nodes) ** d, 1, 0, start)
