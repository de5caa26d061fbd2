import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

import oracles
from epochscan import BatteryConfig, arch_lm, bds, mcleod_li, run_battery, tsay
from epochscan.errors import DegenerateSeriesError, EpochScanError, InsufficientDataError
from epochscan.nonlin import bds_components
from epochscan.synth import ProcessSpec, empirical_power, empirical_size, generate

GARCH = {"omega": 0.05, "alpha": 0.10, "beta": 0.80}


def _garch(n, seed, index=0):
    return generate(ProcessSpec("garch11", n, seed=seed, params=GARCH), index)


def test_mcleod_li_degenerate():
    with pytest.raises(DegenerateSeriesError, match="degenerate squared series"):
        mcleod_li(np.tile([1.0, -1.0], 200), 5)


def test_mcleod_li_matches_loop_n2000():
    x = np.random.default_rng(12).standard_normal(2000)
    for lag in (5, 15, 20):
        out = mcleod_li(x, lag)
        assert out.statistic == pytest.approx(oracles.mcleod_li(list(x), lag), rel=1e-8)
        assert out.null_distribution.df1 == lag


def test_mcleod_li_garch():
    assert mcleod_li(_garch(2000, 1), 5).p_value < 0.01
    hits = sum(mcleod_li(_garch(2000, 2, i), 15).p_value < 0.01 for i in range(100))
    assert hits >= 95


def test_arch_lm_garch():
    hits = sum(arch_lm(_garch(2000, 3, i), 5).p_value < 0.01 for i in range(100))
    assert hits >= 95


def test_arch_lm_degenerate():
    with pytest.raises(EpochScanError):
        arch_lm(np.tile([2.0, -2.0], 100), 5)


def test_arch_lm_size():
    res = empirical_size("arch_lm:5", ProcessSpec("gaussian_iid", 1000), 1000)
    assert 0.03 <= res.rejection_rate <= 0.07


def test_tsay_quadratic_map():
    # x_t = x_{t-1}^2 - c in the chaotic regime
    x = np.empty(1100)
    x[0] = 0.3
    for t in range(1, x.shape[0]):
        x[t] = x[t - 1] ** 2 - 1.9
    assert tsay(x[100:], 5).p_value < 0.001


def test_tsay_size_n2000():
    res = empirical_size("tsay:5", ProcessSpec("gaussian_iid", 2000), 1000, seed=1)
    assert 0.03 <= res.rejection_rate <= 0.07


def test_tsay_bilinear_power():
    res = empirical_power("tsay:5", ProcessSpec("bilinear", 2000, params={"b": 0.6}), 500)
    assert res.rejection_rate >= 0.15


def test_tsay_records_degrees_of_freedom():
    out = tsay(np.random.default_rng(0).standard_normal(500), 5)
    assert out.details["m"] == 15 and out.details["m_dropped"] == 0
    assert (out.null_distribution.df1, out.null_distribution.df2) == (15, 495 - 5 - 15 - 1)


def test_tsay_drops_collinear_products():
    # a two-valued series makes every x_{t-i}^2 constant, hence collinear with the intercept
    x = np.where(np.random.default_rng(1).random(400) < 0.5, -1.0, 1.0)
    out = tsay(x, 3)
    assert out.details["m_dropped"] == 3
    assert out.details["m"] == 3
    assert out.null_distribution.df1 == 3


def test_tsay_too_short():
    with pytest.raises(InsufficientDataError):
        tsay(np.random.default_rng(0).standard_normal(30), 5)


def test_bds_logistic_map():
    x = generate(ProcessSpec("logistic_map", 1000, seed=4))
    out = bds(x, 2, 0.5 * np.std(x, ddof=1))
    assert abs(out.statistic) > 10
    assert out.p_value < 1e-6


def test_bds_components_match_loops():
    x = np.random.default_rng(77).standard_normal(120)
    eps = 0.8 * np.std(x, ddof=1)
    for m in (2, 3):
        comp = bds_components(x, m, eps)
        ref = oracles.bds(list(x), m, eps)
        assert comp.c1 == pytest.approx(ref["c1"], abs=1e-10)
        assert comp.k == pytest.approx(ref["k"], abs=1e-10)
        assert comp.cm == pytest.approx(ref["cm"], abs=1e-10)
        assert comp.c1_m == pytest.approx(ref["c1_m"], abs=1e-10)


def test_bds_agrees_with_statsmodels():
    sm = pytest.importorskip("statsmodels.tsa.stattools")
    for seed in range(3):
        x = np.random.default_rng(seed).standard_normal(600)
        for m in (2, 3, 4):
            eps = 0.7 * np.std(x, ddof=1)
            w, _ = sm.bds(x, max_dim=m, epsilon=eps)
            assert bds(x, m, eps).statistic == pytest.approx(float(np.atleast_1d(w)[-1]),
                                                             rel=1e-9)


def test_bds_degenerate_eps():
    x = np.random.default_rng(0).standard_normal(300)
    with pytest.raises(DegenerateSeriesError, match="degenerate correlation integral"):
        bds(x, 2, 1e-12 * np.std(x))
    with pytest.raises(DegenerateSeriesError):
        bds(x, 2, 100.0)


def test_bds_guards():
    x = np.random.default_rng(0).standard_normal(300)
    with pytest.raises(InsufficientDataError):
        bds(x[:150], 2, 1.0)
    with pytest.raises(ValueError):
        bds(x, 1, 1.0)
    with pytest.raises(ValueError):
        bds(x, 2, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 1e3))
def test_statistics_scale_invariant(seed, lam):
    x = np.random.default_rng(seed).standard_normal(400)
    for func in (mcleod_li, tsay, arch_lm):
        a, b = func(x, 5).statistic, func(lam * x, 5).statistic
        assert b == pytest.approx(a, rel=1e-6, abs=1e-6)
    s = np.std(x, ddof=1)
    a = bds(x, 2, 0.5 * s).statistic
    b = bds(lam * x, 2, 0.5 * np.std(lam * x, ddof=1)).statistic
    assert b == pytest.approx(a, rel=1e-6, abs=1e-6)


def test_mcleod_li_and_arch_lm_agree_across_seeds():
    p_ml, p_arch = [], []
    for i in range(200):
        x = _garch(500, 8, i)
        p_ml.append(mcleod_li(x, 5).p_value)
        p_arch.append(arch_lm(x, 5).p_value)
    assert stats.spearmanr(p_ml, p_arch).statistic > 0


def test_battery_layout():
    x = np.random.default_rng(3).standard_normal(800)
    cells = run_battery(x)
    assert len(cells) == 12
    assert [c.test for c in cells] == ["McLeod-Li"] * 3 + ["Tsay"] * 3 + ["ARCH-LM"] * 3 + ["BDS"] * 3
    assert [c.setting for c in cells[:3]] == ["lag=5", "lag=15", "lag=20"]
    assert [c.setting for c in cells[9:]] == ["m=2,eps=0.5s", "m=3,eps=1s", "m=4,eps=1.5s"]
    s = np.std(x, ddof=1)
    assert cells[9].outcome.statistic == bds(x, 2, 0.5 * s).statistic
    assert all(c.error is None for c in cells)


def test_battery_full_grid():
    cfg = BatteryConfig(bds_full_grid=True)
    assert len(run_battery(np.random.default_rng(0).standard_normal(400), cfg)) == 9 + 9


def test_battery_records_errors_without_aborting():
    cells = run_battery(np.tile([1.0, -1.0], 150))
    assert len(cells) == 12
    assert cells[0].error == "degenerate squared series"
    assert cells[0].outcome is None and cells[0].to_dict()["outcome"] is None


def test_battery_garch_rejects():
    cells = run_battery(_garch(2000, 6))
    for c in cells:
        if c.test in ("McLeod-Li", "ARCH-LM"):
            assert c.rejects(0.05)


@pytest.mark.parametrize("kwargs", [
    {"lags": (0,)}, {"bds_dims": (1,), "bds_eps_multiples": (1.0,)},
    {"bds_eps_multiples": (0.5, -1.0, 1.0)}, {"alpha": 1.5},
    {"bds_dims": (2, 3), "bds_eps_multiples": (1.0,)},
])
def test_battery_config_validation(kwargs):
    with pytest.raises(ValueError):
        BatteryConfig(**kwargs)


def test_outcome_serialization_is_finite():
    out = tsay(np.random.default_rng(0).standard_normal(300), 2).to_dict()
    assert out["null_distribution"]["kind"] == "F"
    assert out["details"]["m"] == 3
    assert all(v is None or math.isfinite(v) for v in (out["statistic"], out["p_value"]))
