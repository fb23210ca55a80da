"""European payoff structures: scaling rules, Fourier transforms, strips."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit

_KINDS = ("basket_put", "spread_call", "call_on_min", "cash_digital")


@dataclass(frozen=True)
class PayoffSpec:
    """Terminal payoff description in market units.

    kind:
      basket_put:   (strike - sum_j weights_j S_j)+
      spread_call:  (S_1 - sum_{j>=2} S_j - strike)+
      call_on_min:  (min_j S_j - strike)+
      cash_digital: cash * 1{S_j > strike_j for all j}
    """

    kind: str
    spot: np.ndarray
    strike: float | np.ndarray = 1.0
    weights: np.ndarray | None = None
    cash: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown payoff kind {self.kind!r}")
        spot = np.atleast_1d(np.asarray(self.spot, dtype=float))
        if np.any(spot <= 0):
            raise ValueError("spot prices must be positive")
        object.__setattr__(self, "spot", spot)
        d = spot.shape[0]
        if self.kind == "cash_digital":
            strike = np.broadcast_to(np.asarray(self.strike, dtype=float), (d,)).copy()
            if np.any(strike <= 0):
                raise ValueError("strikes must be positive")
            object.__setattr__(self, "strike", strike)
            if not (self.cash > 0):
                raise ValueError("cash must be positive")
        else:
            strike = float(np.asarray(self.strike))
            if strike <= 0:
                raise ValueError("strike must be positive")
            object.__setattr__(self, "strike", strike)
        if self.kind == "basket_put":
            if self.weights is None:
                raise ValueError("basket_put needs weights")
            w = np.atleast_1d(np.asarray(self.weights, dtype=float))
            if w.shape != (d,) or np.any(w <= 0):
                raise ValueError("weights must be positive, one per asset")
            object.__setattr__(self, "weights", w)
        if self.kind == "spread_call" and d < 2:
            raise ValueError("spread_call needs at least two assets")

    @property
    def dim(self) -> int:
        return self.spot.shape[0]


def scaling_rule(p: PayoffSpec):
    """Initial log-coordinates x0 and the factor that undoes the unit-strike scaling."""
    if p.kind == "basket_put":
        return np.log(p.weights * p.spot / p.strike), float(p.strike)
    if p.kind in ("spread_call", "call_on_min"):
        return np.log(p.spot / p.strike), float(p.strike)
    return np.log(p.spot / p.strike), float(p.cash)


def payoff_value(p: PayoffSpec, x) -> np.ndarray:
    """Payoff in market units at scaled log-coordinates x, shape (n, d)."""
    x = np.asarray(x, dtype=float)
    if p.kind == "basket_put":
        return p.strike * np.maximum(1.0 - np.exp(x).sum(axis=-1), 0.0)
    if p.kind == "spread_call":
        e = np.exp(x)
        return p.strike * np.maximum(e[..., 0] - e[..., 1:].sum(axis=-1) - 1.0, 0.0)
    if p.kind == "call_on_min":
        return p.strike * np.maximum(np.exp(x).min(axis=-1) - 1.0, 0.0)
    return p.cash * np.all(x > 0.0, axis=-1).astype(float)


def strip_terms(p: PayoffSpec, R) -> list:
    """(slack, scale) pairs that must stay positive for the transform integral."""
    R = np.asarray(R, dtype=float)
    if p.kind == "basket_put":
        return [(float(r), 1.0) for r in R]
    if p.kind == "spread_call":
        terms = [(float(r), 1.0) for r in R[1:]]
        terms.append((float(-1.0 - R[1:].sum() - R[0]), 1.0))
        return terms
    if p.kind == "call_on_min":
        terms = [(float(-r), 1.0) for r in R]
        terms.append((float(-R.sum() - 1.0), 1.0))
        return terms
    return [(float(-r), 1.0) for r in R]


def in_strip(p: PayoffSpec, R) -> bool:
    return all(s > 0 for s, _ in strip_terms(p, R))


def feasible_anchor(p: PayoffSpec) -> np.ndarray:
    """A damping vector comfortably inside the payoff strip, used to seed search."""
    d = p.dim
    if p.kind == "basket_put":
        return np.ones(d)
    if p.kind == "spread_call":
        R = np.ones(d)
        R[0] = -float(d) - 1.0
        return R
    if p.kind == "call_on_min":
        return np.full(d, -(2.0 / d + 0.2))
    return -np.ones(d)


def log_payoff_transform(p: PayoffSpec, z) -> np.ndarray:
    """Complex log of the payoff transform; keeps huge decays representable."""
    z = np.asarray(z, dtype=complex)
    iz = 1j * z
    if p.kind == "cash_digital":
        return -np.log(iz).sum(axis=-1)
    if p.kind == "call_on_min":
        return -np.log(iz.sum(axis=-1) - 1.0) - np.log(iz).sum(axis=-1)
    if p.kind == "basket_put":
        return numkit._log_gamma_vec(-iz).sum(axis=-1) \
            - numkit._log_gamma_vec(2.0 - iz.sum(axis=-1))
    # spread_call
    return numkit._log_gamma_vec(iz.sum(axis=-1) - 1.0) \
        + numkit._log_gamma_vec(-iz[..., 1:]).sum(axis=-1) \
        - numkit._log_gamma_vec(iz[..., 0] + 1.0)


def payoff_transform(p: PayoffSpec, z) -> np.ndarray:
    """Fourier transform of the unit-scaled payoff at complex z, shape (n, d).

    Defined as the integral of payoff(x) exp(-i z.x) over log-coordinates; it
    exists exactly when Im z lies inside the payoff strip.
    """
    return np.exp(log_payoff_transform(p, z))


def log_transform_at(p: PayoffSpec, R) -> float:
    """log of the (real, positive) payoff transform at z = iR inside the strip."""
    R = np.asarray(R, dtype=float)
    if not in_strip(p, R):
        raise ValueError("damping vector outside the payoff strip")
    if p.kind == "basket_put":
        return float(sum(math.lgamma(r) for r in R) - math.lgamma(R.sum() + 2.0))
    if p.kind == "spread_call":
        return float(math.lgamma(-R.sum() - 1.0)
                     + sum(math.lgamma(r) for r in R[1:])
                     - math.lgamma(1.0 - R[0]))
    if p.kind == "call_on_min":
        return float(-math.log(-R.sum() - 1.0) - np.log(-R).sum())
    return float(-np.log(-R).sum())
