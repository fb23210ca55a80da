"""Price-process models: characteristic functions, analyticity strips, drift."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkit

_FAMILIES = ("gbm", "vg", "nig", "gh")


class StripViolation(ValueError):
    """Characteristic function evaluated outside its strip of analyticity."""


def _as_cov(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got {M.shape}")
    if np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, float(np.max(np.abs(M)))):
        raise ValueError(f"{name} must be symmetric")
    numkit.cholesky(M)  # raises NotPositiveDefinite
    return M


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Exponential-Levy model for the joint log-price vector.

    family selects the parameterization:
      gbm: sigma (covariance per unit time)
      vg:  sigma, theta, nu
      nig: alpha, beta, delta, Delta
      gh:  alpha, beta, delta, Delta, lam
    rate is the risk-free rate, horizon the maturity in years.
    """

    family: str
    rate: float
    horizon: float
    sigma: np.ndarray | None = None
    theta: np.ndarray | None = None
    nu: float | None = None
    alpha: float | None = None
    beta: np.ndarray | None = None
    delta: float | None = None
    Delta: np.ndarray | None = None
    lam: float | None = None
    _drift: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if not (self.horizon > 0):
            raise ValueError("horizon must be positive")
        if self.family in ("gbm", "vg"):
            if self.sigma is None:
                raise ValueError(f"{self.family} needs sigma")
            object.__setattr__(self, "sigma", _as_cov(self.sigma, "sigma"))
        if self.family == "vg":
            if self.theta is None or self.nu is None:
                raise ValueError("vg needs theta and nu")
            if not (self.nu > 0):
                raise ValueError("nu must be positive")
            theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
            if theta.shape != (self.sigma.shape[0],):
                raise ValueError("theta length must match sigma")
            object.__setattr__(self, "theta", theta)
        if self.family in ("nig", "gh"):
            for nm in ("alpha", "beta", "delta", "Delta"):
                if getattr(self, nm) is None:
                    raise ValueError(f"{self.family} needs {nm}")
            if not (self.alpha > 0) or not (self.delta > 0):
                raise ValueError("alpha and delta must be positive")
            object.__setattr__(self, "Delta", _as_cov(self.Delta, "Delta"))
            beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
            if beta.shape != (self.Delta.shape[0],):
                raise ValueError("beta length must match Delta")
            object.__setattr__(self, "beta", beta)
            if self.alpha ** 2 - beta @ self.Delta @ beta <= 0:
                raise ValueError("alpha^2 - beta' Delta beta must be positive")
        if self.family == "gh" and self.lam is None:
            raise ValueError("gh needs lam")
        # exponential moments E[exp(X_j)] must exist for the drift correction
        d = self.dim
        for j in range(d):
            ej = np.zeros(d)
            ej[j] = 1.0
            if _strip_slacks(self, -ej):
                worst = min(s for s, _ in _strip_slacks(self, -ej))
                if worst <= 0:
                    raise StripViolation(
                        f"exponential moment for component {j} does not exist")

    @property
    def dim(self) -> int:
        M = self.sigma if self.family in ("gbm", "vg") else self.Delta
        return M.shape[0]


def _quad(z, M):
    # bilinear form z' M z over the trailing axis, no conjugation
    return np.einsum("...i,ij,...j->...", z, M, z)


def _strip_slacks(m: ModelSpec, R: np.ndarray):
    """Constraint slacks (value, characteristic scale) that must stay positive
    for z = y + iR to remain inside the strip of analyticity, for all real y."""
    R = np.asarray(R, dtype=float)
    if m.family == "gbm":
        return []
    if m.family == "vg":
        val = 1.0 + m.nu * (R @ m.theta) - 0.5 * m.nu * (R @ m.sigma @ R)
        return [(float(val), 1.0)]
    w = m.beta - R
    val = m.alpha ** 2 - w @ m.Delta @ w
    return [(float(val), float(m.alpha ** 2))]


def strip_terms(m: ModelSpec, R) -> list:
    """(slack, scale) pairs for the model strip constraints at damping vector R."""
    return _strip_slacks(m, np.asarray(R, dtype=float))


def in_strip(m: ModelSpec, R) -> bool:
    return all(s > 0 for s, _ in _strip_slacks(m, np.asarray(R, dtype=float)))


def log_char(m: ModelSpec, z):
    """log of the drift-free characteristic function at complex z, shape (..., d).

    Principal branches are safe because the relevant radicand or power base is
    verified to have positive real part; a crossing raises StripViolation.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 1
    T = m.horizon
    if m.family == "gbm":
        out = -0.5 * T * _quad(z, m.sigma)
    elif m.family == "vg":
        base = 1.0 - 1j * m.nu * (z @ m.theta) + 0.5 * m.nu * _quad(z, m.sigma)
        if np.any(base.real <= 0):
            raise StripViolation("vg power base crossed the branch cut")
        out = (-T / m.nu) * np.log(base)
    else:
        w = m.beta + 1j * z
        c = m.alpha ** 2 - _quad(w, m.Delta)
        if np.any(c.real <= 0):
            raise StripViolation(f"{m.family} radicand crossed the branch cut")
        gam = np.sqrt(m.alpha ** 2 - m.beta @ m.Delta @ m.beta)
        if m.family == "nig":
            out = m.delta * T * (gam - np.sqrt(c))
        else:
            dT = m.delta * T
            arg = dT * np.sqrt(c)
            log_k = -arg + np.log(numkit.bessel_k(m.lam, arg, scaled=True))
            ref = dT * gam
            log_k0 = -ref + np.log(numkit.bessel_k(m.lam, complex(ref), scaled=True))
            out = m.lam * np.log(gam) - 0.5 * m.lam * np.log(c) + log_k - log_k0
    return complex(out) if scalar and np.ndim(out) == 0 else out


def drift_correction(m: ModelSpec) -> np.ndarray:
    """Per-component drift mu with E[exp(X_T,j)] = exp((rate + mu_j) ... ) normalized
    so that discounted prices are martingales; cached on the model."""
    if m._drift is not None:
        return m._drift
    d = m.dim
    mu = np.empty(d)
    for j in range(d):
        ej = np.zeros(d)
        ej[j] = 1.0
        mu[j] = -complex(log_char(m, -1j * ej)).real / m.horizon
    object.__setattr__(m, "_drift", mu)
    return mu


def char_function(m: ModelSpec, z, x0=None):
    """Full characteristic function of X_T started at x0 under the pricing measure."""
    z = np.asarray(z, dtype=complex)
    d = m.dim
    if x0 is None:
        x0 = np.zeros(d)
    x0 = np.asarray(x0, dtype=float)
    mu = drift_correction(m)
    shift = x0 + (m.rate + mu) * m.horizon
    out = np.exp(1j * (z @ shift) + log_char(m, z))
    return complex(out) if np.ndim(out) == 0 else out
