"""Experiment harness: slope fitting, catalog, references, CSV, stopping rules."""

import math
import re

import numpy as np
import pytest
from scipy import stats

from fourierqmc import bench, payoffs, pricer, qmc, transform


def _bs_put(spot, strike, sig, T, r):
    srt = sig * math.sqrt(T)
    d1 = (math.log(spot / strike) + (r + 0.5 * sig * sig) * T) / srt
    d2 = d1 - srt
    return strike * math.exp(-r * T) * stats.norm.cdf(-d2) \
        - spot * stats.norm.cdf(-d1)


# ---------------------------------------------------------------- slope fit

def test_slope_fit_recovers_synthetic_line():
    N = 2 ** np.arange(6, 14)
    a, b = 1.7, -1.37
    rel = 2.0 ** (a + b * np.log2(N))
    slope, intercept = bench.fit_slope(N, rel)
    assert abs(slope - b) <= 1e-9
    assert abs(intercept - a) <= 1e-9


def test_slope_fit_uses_trailing_points():
    N = 2 ** np.arange(4, 13)
    rel = 2.0 ** (0.3 - 1.21 * np.log2(N))
    rel[:4] *= 64.0  # corrupt the head; the trailing five stay on the line
    slope, _ = bench.fit_slope(N, rel)
    assert abs(slope + 1.21) <= 1e-9


def test_slope_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        bench.fit_slope([64.0], [0.5])
    with pytest.raises(ValueError):
        bench.fit_slope([64.0, 128.0], [0.5, 0.25, 0.125])


# ------------------------------------------------------------------ catalog

def test_catalog_instances_consistent():
    cat = bench.instance_catalog()
    for must in ("gbm1d-put", "gbm1d-put-sig1", "gbm2d-min-rho00",
                 "gbm2d-min-rho07-uni", "gbm2d-min-rho07-mat",
                 "gh1d-put", "gh1d-put-sig1", "vg1d-put", "vg1d-put-sig1",
                 "vg1d-put-nu02", "vg1d-put-heavy", "vg6d-digital", "vg6d-min",
                 "nig3d-basket", "nig3d-spread", "gbm4d-basket",
                 "vg4d-basket", "nig4d-basket"):
        assert must in cat, must
    for key, inst in cat.items():
        assert inst.instance_id == key
        assert inst.payoff.dim == inst.model.dim
        if inst.transform is not None:
            assert inst.transform.dim == inst.model.dim


def test_catalog_transform_rules():
    cat = bench.instance_catalog()
    ts = transform.default_transform(cat["gbm1d-put"].model)
    assert ts.kind == "gaussian_product"
    np.testing.assert_allclose(ts.sigmas, [5.0])
    uni = cat["gbm2d-min-rho07-uni"].transform
    assert uni.kind == "gaussian_product"
    np.testing.assert_allclose(uni.sigmas, [5.0, 5.0])
    mat = cat["gbm2d-min-rho07-mat"]
    assert mat.transform is None
    assert transform.default_transform(mat.model).kind == "gaussian_matrix"
    heavy = cat["vg1d-put-heavy"]
    crit = transform.default_transform(heavy.model)
    assert heavy.transform.nu == 2.0 * crit.nu
    np.testing.assert_allclose(heavy.transform.sigmas, crit.sigmas)
    assert cat["vg6d-digital"].model.dim == 6
    assert cat["vg6d-digital"].payoff.kind == "cash_digital"


def test_get_instance_unknown_id_lists_available():
    with pytest.raises(KeyError) as err:
        bench.get_instance("no-such-instance")
    assert "gbm1d-put" in str(err.value)


def test_instance_dimension_mismatch_rejected():
    inst = bench.get_instance("gbm1d-put")
    bad = payoffs.PayoffSpec("basket_put", spot=[100.0, 100.0], strike=100.0,
                             weights=[0.5, 0.5])
    with pytest.raises(ValueError):
        bench.Instance("bad", inst.model, bad)


# --------------------------------------------------------------- references

def test_reference_bs_put_closed_form():
    val, src = bench.reference_price(bench.get_instance("gbm1d-put"))
    assert src == "closed_form"
    assert abs(val - 7.9655674554058) <= 1e-10
    assert abs(val - _bs_put(100.0, 100.0, 0.2, 1.0, 0.0)) <= 1e-10


def test_reference_digital_closed_form():
    inst = bench.get_instance("gbm1d-put")
    dig = bench.Instance("digital-tmp", inst.model,
                         payoffs.PayoffSpec("cash_digital", spot=[100.0],
                                            strike=100.0, cash=1.0))
    val, src = bench.reference_price(dig)
    assert src == "closed_form"
    # exercise probability N(-0.1) under the sigma^2/2-corrected drift
    assert abs(val - 0.460172162722971) <= 1e-12
    assert abs(val - stats.norm.cdf(-0.1)) <= 1e-12


def test_reference_1d_call_matches_put_parity():
    inst = bench.get_instance("gbm1d-put")
    put, _ = bench.reference_price(inst)
    call_inst = bench.Instance("call-tmp", inst.model,
                               payoffs.PayoffSpec("call_on_min", spot=[100.0],
                                                  strike=100.0))
    val, src = bench.reference_price(call_inst)
    assert src == "closed_form"
    assert abs(val - put) <= 1e-10  # ATM, zero rate: call equals put


def test_reference_tp_for_2d():
    inst = bench.get_instance("gbm2d-min-rho00")
    val, src = bench.reference_price(inst)
    assert src == "tplaguerre_n64"
    est = pricer.price_fourier_rqmc(inst.model, inst.payoff, N=1 << 10, S=8)
    assert abs(val - est.price) <= max(4 * est.stat_error, 1e-3 * abs(val))


def test_reference_physical_mc_and_cache():
    inst = bench.get_instance("nig3d-basket")
    val, src = bench.reference_price(inst, mc_paths=150_000)
    assert src == "mcphysical_M150000"
    val2, src2 = bench.reference_price(inst, mc_paths=150_000)
    assert val2 == val and src2 == src
    est = pricer.price_fourier_rqmc(inst.model, inst.payoff, N=1 << 10, S=8)
    assert abs(val - est.price) <= 0.05 * abs(val)


# ---------------------------------------------------------------------- CSV

def _toy_run():
    return bench.ConvergenceRun(
        instance_id="toy", backend="rqmc", model="gbm", payoff="basket_put",
        d=1, S=8, seed=20140, N_grid=(64, 128, 256, 512, 1024),
        values=(math.pi, 1.0 / 3.0, 2.0 ** -30, 6.02214076e23,
                7.9655674554058),
        stat_errors=(1e-3, 5e-4, 2.5e-4, 1.25e-4, 2.0 ** -52),
        rel_stat_errors=(1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6),
        wall_ms=(0.5, 1.0, 2.0, 4.0, 8.0),
        slope=-1.3719, intercept=2.25, reference=7.9655674554058,
        reference_source="closed_form")


def test_csv_round_trip_exact(tmp_path):
    run = _toy_run()
    (path,) = bench.write_csv(run, tmp_path, timestamp="20260819T000000")
    assert path.name == "toy__rqmc__20260819T000000.csv"
    rows = bench.read_csv(path)
    assert len(rows) == len(run.N_grid) + 1
    for i, row in enumerate(rows[:-1]):
        assert row["instance_id"] == "toy" and row["backend"] == "rqmc"
        assert row["model"] == "gbm" and row["payoff"] == "basket_put"
        assert row["d"] == 1 and row["S"] == 8 and row["seed"] == 20140
        assert row["N"] == run.N_grid[i]
        assert row["estimate"] == run.values[i]
        assert row["stat_error"] == run.stat_errors[i]
        assert row["rel_error"] == run.rel_stat_errors[i]
        assert row["wall_ms"] == run.wall_ms[i]
        assert row["reference"] == run.reference
        assert row["reference_source"] == "closed_form"
        assert row["slope"] is None
    summary = rows[-1]
    assert summary["slope"] == run.slope
    assert summary["N"] is None and summary["estimate"] is None
    assert summary["reference"] == run.reference


def test_csv_header_and_validation(tmp_path):
    (path,) = bench.write_csv(_toy_run(), tmp_path, timestamp="20260819T000001")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first == ",".join(bench.CSV_COLUMNS)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ValueError):
        bench.read_csv(bad)


def test_csv_default_timestamp_pattern(tmp_path):
    (path,) = bench.write_csv(_toy_run(), tmp_path)
    assert re.fullmatch(r"toy__rqmc__\d{8}T\d{6}\.csv", path.name)


def test_convergence_run_validation():
    run = _toy_run()
    with pytest.raises(ValueError):
        bench.ConvergenceRun(**{**run.__dict__, "N_grid": (64, 100)})
    with pytest.raises(ValueError):
        bench.ConvergenceRun(**{**run.__dict__, "N_grid": (256, 128, 64, 32, 16)})
    with pytest.raises(ValueError):
        bench.ConvergenceRun(**{**run.__dict__, "values": (1.0, 2.0)})
    with pytest.raises(ArithmeticError):
        bench.ConvergenceRun(**{**run.__dict__, "slope": math.inf})


# ------------------------------------------------------------- convergence

def test_run_convergence_gbm_rqmc():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_convergence(inst, "rqmc", N_grid=2 ** np.arange(6, 11),
                                S=8, reps=1)
    assert run.reference_source == "closed_form"
    assert run.backend == "rqmc" and run.model == "gbm"
    for s, r in zip(run.stat_errors, run.rel_stat_errors):
        assert r == s / abs(run.reference)
    assert all(w > 0 for w in run.wall_ms)
    assert run.slope <= -0.8
    gap = abs(run.values[-1] - run.reference)
    assert gap <= 5.0 * run.stat_errors[-1] + 1e-9 * abs(run.reference)


def test_run_convergence_mcfourier_rate():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_convergence(inst, "mcfourier",
                                N_grid=2 ** np.arange(8, 14), S=16, reps=1)
    assert -0.75 <= run.slope <= -0.25


def test_run_convergence_input_validation():
    inst = bench.get_instance("gbm1d-put")
    with pytest.raises(ValueError):
        bench.run_convergence(inst, "tplaguerre", N_grid=(64, 128))
    with pytest.raises(ValueError):
        bench.run_convergence(inst, "rqmc", N_grid=(100, 200))
    with pytest.raises(ValueError):
        bench.run_convergence(inst, "rqmc", N_grid=(128, 64))
    with pytest.raises(ValueError):
        bench.run_convergence(inst, "rqmc", N_grid=(64, 128), reps=0)


# --------------------------------------------------------- runtime to tol

def test_runtime_trivial_tol_minimal_and_fast():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_runtime_to_tol(inst, ("rqmc",), (0.5,), S=8, reps=1)
    assert run.backends == ("rqmc",)
    (row,) = run.rows
    assert row.N == 64  # the ladder's first rung already satisfies TOL
    assert row.rel_error <= 0.5
    assert row.wall_ms < 1000.0
    assert row.stopping_rule == "double_n_until_rel_stat_le_tol"


def test_runtime_rows_monotone_per_backend():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_runtime_to_tol(inst, ("rqmc",), (1e-1, 1e-2, 1e-3),
                                   S=8, reps=1)
    rows = [r for r in run.rows if r.backend == "rqmc"]
    assert len(rows) == 3
    assert all(r.rel_error <= r.tol for r in rows)
    assert all(b.N >= a.N for a, b in zip(rows, rows[1:]))
    assert all(b.wall_ms >= a.wall_ms for a, b in zip(rows, rows[1:]))


def test_runtime_tp_exact_stopping():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_runtime_to_tol(inst, ("tplaguerre",), (1e-2, 1e-6), reps=1)
    rows = [r for r in run.rows if r.backend == "tplaguerre"]
    assert len(rows) == 2
    for row in rows:
        assert row.stopping_rule == "refine_nodes_until_rel_exact_le_tol"
        assert row.stat_error == 0.0
        assert row.rel_error <= row.tol
        assert abs(row.estimate - run.reference) \
            <= row.tol * abs(run.reference)
    assert rows[1].N >= rows[0].N


def test_runtime_budget_exceeded_carries_partial():
    inst = bench.get_instance("gbm1d-put")
    with pytest.raises(bench.BudgetExceeded) as err:
        bench.run_runtime_to_tol(inst, ("rqmc",), (0.5, 1e-12), S=8, reps=1,
                                 max_points=1 << 10)
    partial = err.value.partial
    assert partial.instance_id == "gbm1d-put"
    assert len(partial.rows) == 1
    assert partial.rows[0].tol == 0.5


def test_runtime_mcphysical_backend():
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_runtime_to_tol(inst, ("mcphysical",), (0.2,), reps=1)
    (row,) = run.rows
    assert row.backend == "mcphysical"
    assert row.rel_error <= 0.2
    assert row.stopping_rule == "double_paths_until_rel_stat_le_tol"


def test_runtime_multibackend_order_and_csv(tmp_path):
    inst = bench.get_instance("gbm1d-put")
    run = bench.run_runtime_to_tol(inst, ("rqmc", "mcfourier"), (1e-1,),
                                   S=8, reps=1)
    assert [r.backend for r in run.rows] == ["rqmc", "mcfourier"]
    paths = bench.write_csv(run, tmp_path, timestamp="20260819T000002")
    assert sorted(p.name for p in paths) == [
        "gbm1d-put__mcfourier__20260819T000002.csv",
        "gbm1d-put__rqmc__20260819T000002.csv"]
    for p in paths:
        rows = bench.read_csv(p)
        assert len(rows) == 1
        assert rows[0]["slope"] is None
        assert rows[0]["rel_error"] <= 1e-1
        assert rows[0]["reference_source"] == "closed_form"


def test_runtime_input_validation():
    inst = bench.get_instance("gbm1d-put")
    with pytest.raises(ValueError):
        bench.run_runtime_to_tol(inst, ("warp-drive",), (0.5,))
    with pytest.raises(ValueError):
        bench.run_runtime_to_tol(inst, ("rqmc",), (1e-2, 1e-1))
    with pytest.raises(ValueError):
        bench.run_runtime_to_tol(inst, ("rqmc",), ())


# ------------------------------------------------------------ sobol kernels

def test_sobol_kernel_bench(tmp_path):
    res = bench.sobol_kernel_bench(N=1 << 10, d=6, reps=1)
    names = {row.backend for row in res.rows}
    assert "numpy" in names
    if qmc.BACKEND == "compiled":
        assert names == {"numpy", "compiled"}
        assert res.identical is True
    assert all(row.wall_ms >= 0.0 for row in res.rows)
    paths = bench.write_csv(res, tmp_path, timestamp="20260819T000003")
    assert len(paths) == len(res.rows)
    for p in paths:
        (row,) = bench.read_csv(p)
        assert row["instance_id"] == "sobol-kernel"
        assert row["N"] == 1 << 10 and row["d"] == 6
        assert row["estimate"] is None and row["slope"] is None


# ------------------------------------------------------------------- suites

def test_run_suite_fig4(tmp_path):
    paths = bench.run_suite("fig4", tmp_path, N_grid=2 ** np.arange(6, 9),
                            S=4, reps=1, timestamp="20260819T000004")
    names = sorted(p.name for p in paths)
    assert names == ["gbm1d-put-sig1__rqmc__20260819T000004.csv",
                     "gbm1d-put__rqmc__20260819T000004.csv"]
    for p in paths:
        rows = bench.read_csv(p)
        assert rows[-1]["slope"] is not None  # summary row carries the fit


def test_run_suite_unknown_id():
    with pytest.raises(KeyError) as err:
        bench.run_suite("no-such-suite", ".")
    assert "fig4" in str(err.value) and "fig3" in str(err.value)
