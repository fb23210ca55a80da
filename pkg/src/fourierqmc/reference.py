"""Physical-space Monte Carlo: terminal-law samplers and a reference pricer.

Terminal log-prices are drawn exactly (no time stepping): Gaussian for GBM,
gamma-subordinated Gaussian for VG, inverse-Gaussian subordination for NIG
and for GH at lambda = -1/2, generalized-inverse-Gaussian subordination for
other lambda behind an explicit opt-in.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import models, numkit, payoffs
from .pricer import PriceEstimate, _wrap

_BLOCK = 1 << 16


class SubordinatorUnavailable(RuntimeError):
    """Exact terminal sampling for this model needs the GIG sampler opt-in."""


@dataclass(frozen=True)
class PathBatch:
    M: int
    X: np.ndarray
    seed: int


def gamma_draws(rng: np.random.Generator, shape: float, n: int) -> np.ndarray:
    """Gamma(shape, scale=1) via the squeeze-free accept/reject of the
    cubed-normal method; shapes below 1 use the uniform-power boost."""
    a = float(shape)
    boost = None
    if a < 1.0:
        boost = rng.random(n) ** (1.0 / a)
        a += 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    filled = 0
    while filled < n:
        k = n - filled
        x = rng.standard_normal(k)
        v = (1.0 + c * x) ** 3
        u = rng.random(k)
        pos = v > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = pos & (np.log(u) < 0.5 * x * x
                        + d * (1.0 - v + np.log(np.where(pos, v, 1.0))))
        good = d * v[ok]
        out[filled:filled + good.size] = good
        filled += good.size
    return out if boost is None else out * boost


def ig_draws(rng: np.random.Generator, mean: float, shape: float,
             n: int) -> np.ndarray:
    """Inverse-Gaussian(mean, shape) by the squared-normal root transform."""
    mu, lam = float(mean), float(shape)
    nu = rng.standard_normal(n) ** 2
    x = mu + mu * mu * nu / (2.0 * lam) \
        - mu / (2.0 * lam) * np.sqrt(4.0 * mu * lam * nu + (mu * nu) ** 2)
    u = rng.random(n)
    return np.where(u <= mu / (mu + x), x, mu * mu / x)


def gig_draws(rng: np.random.Generator, lam: float, chi: float, psi: float,
              n: int) -> np.ndarray:
    """GIG(lam, chi, psi), density ~ w^{lam-1} exp(-(chi/w + psi w)/2), by
    ratio-of-uniforms on the standardized two-parameter form."""
    omega = math.sqrt(chi * psi)
    eta = math.sqrt(chi / psi)
    lm1 = lam - 1.0

    def logf(x):
        return lm1 * np.log(x) - 0.5 * omega * (x + 1.0 / x)

    mode = (lm1 + math.sqrt(lm1 * lm1 + omega * omega)) / omega
    lf0 = float(logf(mode))
    lp1 = lam + 1.0
    xv = (lp1 + math.sqrt(lp1 * lp1 + omega * omega)) / omega
    v_max = xv * math.exp(0.5 * (float(logf(xv)) - lf0))
    out = np.empty(n)
    filled = 0
    while filled < n:
        k = 2 * (n - filled) + 16
        u = rng.random(k)
        v = rng.random(k) * v_max
        with np.errstate(divide="ignore"):
            x = np.where(u > 0, v / u, np.inf)
            ok = (x > 0) & np.isfinite(x) & (2.0 * np.log(u) <= logf(x) - lf0)
        good = x[ok][: n - filled]
        out[filled:filled + good.size] = good
        filled += good.size
    return out * eta


def simulate_terminal(m: models.ModelSpec, M: int, seed: int, x0=None,
                      allow_gig: bool = False) -> PathBatch:
    """Exact terminal log-prices X_T, blockwise reproducible in M."""
    if M < 1:
        raise ValueError("need M >= 1")
    d = m.dim
    T = m.horizon
    if m.family == "gh" and m.lam != -0.5 and not allow_gig:
        raise SubordinatorUnavailable(
            "general-lambda GH sampling requires allow_gig=True")
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    drift = x0 + (m.rate + models.drift_correction(m)) * T
    if m.family in ("nig", "gh"):
        L = numkit.cholesky(m.Delta)
        gamma_hat = math.sqrt(m.alpha ** 2 - float(m.beta @ m.Delta @ m.beta))
        dT = m.delta * T
        skew = m.Delta @ m.beta
    else:
        L = numkit.cholesky(m.sigma)
    X = np.empty((M, d))
    for b, start in enumerate(range(0, M, _BLOCK)):
        n = min(_BLOCK, M - start)
        rng = np.random.Generator(np.random.Philox(key=[seed, 2 ** 32 + b]))
        if m.family == "gbm":
            Z = rng.standard_normal((n, d))
            X[start:start + n] = drift + math.sqrt(T) * (Z @ L.T)
        elif m.family == "vg":
            G = m.nu * gamma_draws(rng, T / m.nu, n)
            Z = rng.standard_normal((n, d))
            X[start:start + n] = drift + G[:, None] * m.theta \
                + np.sqrt(G)[:, None] * (Z @ L.T)
        else:
            if m.family == "gh" and m.lam != -0.5:
                W = gig_draws(rng, m.lam, dT ** 2, gamma_hat ** 2, n)
            else:
                W = ig_draws(rng, dT / gamma_hat, dT ** 2, n)
            Z = rng.standard_normal((n, d))
            X[start:start + n] = drift + W[:, None] * skew \
                + np.sqrt(W)[:, None] * (Z @ L.T)
    return PathBatch(M=M, X=X, seed=seed)


def mc_price_physical(m: models.ModelSpec, p: payoffs.PayoffSpec, M: int,
                      seed: int, allow_gig: bool = False) -> PriceEstimate:
    """Discounted sample-mean payoff over exact terminal draws."""
    start = time.perf_counter()
    x0, _ = payoffs.scaling_rule(p)
    batch = simulate_terminal(m, M, seed, x0=x0, allow_gig=allow_gig)
    vals = payoffs.payoff_value(p, batch.X)
    disc = math.exp(-m.rate * m.horizon)
    price = disc * float(vals.mean())
    stat = 1.96 * disc * float(vals.std(ddof=1)) / math.sqrt(M)
    return _wrap(price, stat, "MCPhysical", M, 1, seed, start)
