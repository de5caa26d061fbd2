import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epochscan import PriceSeries, ReturnSeries, load_prices, log_returns, summary_stats
from epochscan.errors import EpochScanError, InputFormatError, InsufficientDataError
from epochscan.synth import ProcessSpec, empirical_size


def _load(text):
    return load_prices(io.StringIO(text), "test")


def _series(prices):
    prices = np.asarray(prices, float)
    dates = np.datetime64("2020-01-01") + np.arange(prices.shape[0])
    return PriceSeries("x", dates, prices)


def test_minimal_file():
    ps = _load("date,price\n2020-01-01,100.0\n2020-01-02,101.0\n")
    assert len(ps) == 2
    assert ps.prices.tolist() == [100.0, 101.0]
    assert str(ps.dates[0]) == "2020-01-01"


def test_path_source_names_instrument(tmp_path):
    path = tmp_path / "corn.csv"
    path.write_text("date,price\n2020-01-01,1\n2020-01-02,2\n")
    assert load_prices(str(path)).instrument_id == "corn"


def test_bom_and_blank_lines():
    ps = load_prices(io.BytesIO(b"\xef\xbb\xbfdate,price\n\n2020-01-01,1\n\n2020-01-02,2\n"))
    assert len(ps) == 2


@pytest.mark.parametrize("text,message", [
    ("date,price\n2020-01-01,100\n2020-01-02,0.0\n", "nonpositive price at line 3"),
    ("date,price\n2020-01-01,-1\n2020-01-02,1\n", "nonpositive price at line 2"),
    ("date,price\n2020-01-01,1\n2020-01-01,2\n", "duplicate or decreasing date at line 3"),
    ("date,price\n2020-01-02,1\n2020-01-01,2\n", "duplicate or decreasing date at line 3"),
    ("date,price\n2020-01-01,abc\n", "malformed price at line 2"),
    ("date,price\n01/02/2020,1\n", "malformed date at line 2"),
    ("date,price\n2020-01-01,1,2\n", "malformed row at line 2"),
    ("day,close\n2020-01-01,1\n", "expected header"),
    ("", "no data rows"),
    ("date,price\n", "no data rows"),
    ("date,price\n2020-01-01,1\n", "fewer than 2 rows"),
])
def test_load_errors(text, message):
    with pytest.raises(EpochScanError, match=message):
        _load(text)


def test_nan_price_rejected():
    with pytest.raises(InputFormatError, match="nonpositive"):
        _load("date,price\n2020-01-01,nan\n2020-01-02,1\n")


def test_full_length_file():
    dates = np.datetime64("2000-01-03") + np.arange(4267)
    body = "\n".join(f"{d},{100 + 0.01 * i}" for i, d in enumerate(dates))
    ps = _load("date,price\n" + body + "\n")
    assert len(ps) == 4267
    assert len(log_returns(ps)) == 4266


def test_log_returns_examples():
    assert log_returns(_series([1, 1, 1])).values.tolist() == [0.0, 0.0]
    r = log_returns(_series([1.0, math.e, math.e**3])).values
    assert r == pytest.approx([1.0, 2.0], abs=1e-15)


def test_returns_carry_later_date():
    r = log_returns(_series([1, 2, 4]))
    assert [str(d) for d in r.dates] == ["2020-01-02", "2020-01-03"]
    assert r.source_length == 3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1e6), min_size=2, max_size=60), st.floats(1e-3, 1e3))
def test_returns_scale_invariant(prices, lam):
    a = log_returns(_series(prices)).values
    b = log_returns(_series(np.asarray(prices) * lam)).values
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


def test_summary_alternating():
    s = summary_stats(np.tile([1.0, -1.0], 300))
    assert s.n == 600
    assert s.skewness == pytest.approx(0.0, abs=1e-14)
    assert s.kurtosis == pytest.approx(1.0, abs=1e-14)
    assert s.jb_statistic == pytest.approx(100.0, abs=1e-10)


def test_summary_small_hand_case():
    s = summary_stats(np.array([0.0, 0.0, 1.0, -1.0]))
    assert s.mean == 0.0
    assert s.skewness == pytest.approx(0.0, abs=1e-15)
    assert s.kurtosis == pytest.approx(2.0, abs=1e-14)
    assert s.jb_statistic == pytest.approx(4 / 24, abs=1e-14)
    assert s.stddev == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert (s.min, s.max) == (-1.0, 1.0)


def test_summary_constant():
    with pytest.raises(EpochScanError, match="zero variance"):
        summary_stats(np.full(10, 0.3))


def test_summary_too_short():
    with pytest.raises(InsufficientDataError):
        summary_stats(np.array([1.0, 2.0, 3.0]))


def test_summary_json_fields():
    s = summary_stats(ReturnSeries.from_values(np.random.default_rng(0).standard_normal(50)))
    doc = json.loads(s.to_json())
    assert list(doc) == ["n", "mean", "min", "max", "stddev", "skewness", "kurtosis",
                         "jb_statistic", "jb_pvalue"]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-100, 100))
def test_summary_shift_invariant(seed, shift):
    x = np.random.default_rng(seed).standard_normal(200)
    a, b = summary_stats(x), summary_stats(x + shift)
    for field in ("stddev", "skewness", "kurtosis", "jb_statistic"):
        assert getattr(a, field) == pytest.approx(getattr(b, field), abs=1e-10, rel=1e-10)


def test_jb_size_gaussian():
    rate = empirical_size("jarque_bera", ProcessSpec("gaussian_iid", 1000), 2000).rejection_rate
    assert 0.03 <= rate <= 0.08


def test_jb_rejects_student_t5():
    spec = ProcessSpec("student_t_iid", 1000, params={"df": 5})
    assert empirical_size("jarque_bera", spec, 2000).rejection_rate >= 0.95
