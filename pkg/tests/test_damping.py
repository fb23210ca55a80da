"""Damping vector selection: feasibility, stationarity, known optima."""

import math

import numpy as np
import pytest

from fourierqmc.damping import (
    DampingVector,
    InfeasibleRegion,
    damping_objective,
    optimize_damping,
)
from fourierqmc.models import ModelSpec
from fourierqmc.payoffs import PayoffSpec


def _gbm1(sigma=0.2, r=0.0, T=1.0):
    return ModelSpec(family="gbm", rate=r, horizon=T, sigma=np.array([[sigma ** 2]]))


def _put1():
    return PayoffSpec(kind="basket_put", spot=np.array([100.0]), strike=100.0,
                      weights=np.array([1.0]))


def _digital1():
    return PayoffSpec(kind="cash_digital", spot=np.array([100.0]), strike=100.0,
                      cash=1.0)


def test_gbm_put_damping_matches_stationarity():
    # with S0 = K, r = 0, sigma = 0.2, T = 1 the optimum solves
    # 0.02 + 0.04 R = 1/R + 1/(R+1), giving R* ~ 6.589
    out = optimize_damping(_gbm1(), _put1())
    assert isinstance(out, DampingVector)
    assert out.feasible and out.converged
    assert 6.48 <= out.R[0] <= 6.68
    lhs = 0.02 + 0.04 * out.R[0]
    rhs = 1.0 / out.R[0] + 1.0 / (out.R[0] + 1.0)
    assert abs(lhs - rhs) <= 1e-3


def test_gbm_digital_damping_closed_form():
    # stationarity: 0.02 + 0.04 R - 1/R = 0 on R < 0, root (-0.02 - sqrt(0.1604))/0.08
    out = optimize_damping(_gbm1(), _digital1())
    want = (-0.02 - math.sqrt(0.0004 + 0.16)) / 0.08
    assert out.feasible and out.converged
    assert out.R[0] == pytest.approx(want, abs=2e-2)


def test_objective_value_is_reported():
    m, p = _gbm1(), _put1()
    out = optimize_damping(m, p)
    assert out.objective == pytest.approx(damping_objective(m, p, out.R), rel=1e-12)
    # optimum beats the generic anchor
    assert out.objective <= damping_objective(m, p, np.array([1.0])) + 1e-12


def test_margin_positive_and_matches_slack():
    out = optimize_damping(_gbm1(), _put1())
    assert out.margin > 0


def test_nig_basket_2d_stationary_point():
    m = ModelSpec(family="nig", rate=0.03, horizon=1.0, alpha=12.0,
                  beta=np.array([-2.0, 1.0]), delta=0.3,
                  Delta=np.array([[1.0, 0.2], [0.2, 1.0]]))
    p = PayoffSpec(kind="basket_put", spot=np.array([100.0, 95.0]), strike=100.0,
                   weights=np.array([0.5, 0.5]))
    out = optimize_damping(m, p)
    assert out.feasible and out.converged
    # interior stationarity via central differences
    h0 = damping_objective(m, p, out.R)
    for j in range(2):
        e = np.zeros(2)
        e[j] = 1e-4
        g = (damping_objective(m, p, out.R + e) - damping_objective(m, p, out.R - e)) / 2e-4
        assert abs(g) <= 2e-2, (j, g)
    assert h0 < damping_objective(m, p, np.array([1.0, 1.0]))


def test_spread_call_damping_respects_constraints():
    m = ModelSpec(family="gbm", rate=0.02, horizon=0.5,
                  sigma=np.array([[0.09, 0.02], [0.02, 0.04]]))
    p = PayoffSpec(kind="spread_call", spot=np.array([100.0, 96.0]), strike=4.0)
    out = optimize_damping(m, p)
    assert out.feasible and out.converged
    assert out.R[1] > 0
    assert out.R[0] < -1.0 - out.R[1]


def test_call_on_min_damping_respects_constraints():
    m = ModelSpec(family="gbm", rate=0.0, horizon=1.0,
                  sigma=np.array([[0.04, 0.028], [0.028, 0.04]]))
    p = PayoffSpec(kind="call_on_min", spot=np.array([100.0, 100.0]), strike=100.0)
    out = optimize_damping(m, p)
    assert out.feasible and out.converged
    assert np.all(out.R < 0)
    assert out.R.sum() < -1.0


def test_infeasible_intersection_raises():
    # the vg strip is |R| < 1/sqrt(1 - 1e-12) while a one-asset min-call needs
    # R < -1: the overlap is a sliver far below any workable margin
    m = ModelSpec(family="vg", rate=0.0, horizon=1.0,
                  sigma=np.array([[2.0 * (1.0 - 1e-12)]]),
                  theta=np.array([0.0]), nu=1.0)
    p = PayoffSpec(kind="call_on_min", spot=np.array([100.0]), strike=100.0)
    with pytest.raises(InfeasibleRegion):
        optimize_damping(m, p)


def test_damping_deterministic():
    a = optimize_damping(_gbm1(), _put1())
    b = optimize_damping(_gbm1(), _put1())
    assert np.array_equal(a.R, b.R)
