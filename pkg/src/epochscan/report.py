"""End-to-end analysis of one instrument and the report file formats."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .armodel import DEFAULT_MAX_ORDER, prewhiten
from .epochs import ScanReport, WindowSpec, scan_residuals
from .ingest import load_prices, log_returns, summary_stats
from .nonlin import BatteryConfig, run_battery
from .unitroot import (DEFAULT_RALS_REPLICATIONS, DEFAULT_RALS_SEED, adf, critical_values_rals,
                       default_max_lag, rals)

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "schemas", f"report-{SCHEMA_VERSION}.schema.json")


@dataclass(frozen=True)
class AnalysisConfig:
    window: WindowSpec = WindowSpec()
    p_max: int = DEFAULT_MAX_ORDER
    battery: BatteryConfig = BatteryConfig()
    rals_replications: int = DEFAULT_RALS_REPLICATIONS
    seed: int = DEFAULT_RALS_SEED
    date_style: str = "iso"
    svg: bool = False

    def to_dict(self) -> dict:
        return {
            "window_length": self.window.n,
            "c": self.window.c,
            "alpha": self.window.alpha,
            "max_ar_order": self.p_max,
            "lags": list(self.battery.lags),
            "bds_dims": list(self.battery.bds_dims),
            "bds_eps_multiples": list(self.battery.bds_eps_multiples),
            "bds_full_grid": self.battery.bds_full_grid,
            "rals_replications": self.rals_replications,
            "seed": self.seed,
            "date_style": self.date_style,
        }


@dataclass
class InstrumentResult:
    instrument_id: str
    source: str
    record: Optional[dict] = None
    svg: Optional[str] = None
    error: Optional[str] = None


def analyze_file(path: str, config: AnalysisConfig) -> InstrumentResult:
    """Run the whole pipeline on one price file; errors are captured, not raised."""
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        prices = load_prices(path, name)
        returns = log_returns(prices)
        stats = summary_stats(returns)
        n = len(returns)
        max_lag = default_max_lag(n)
        table = critical_values_rals(n, config.rals_replications, config.seed, max_lag)
        unit_root = [adf(returns.values, max_lag), rals(returns.values, max_lag, table)]
        resid = prewhiten(returns, config.p_max)
        battery = run_battery(resid, config.battery)
        report = scan_residuals(resid, config.window, config.date_style)
    except Exception as exc:  # recorded per instrument; other files still run
        return InstrumentResult(name, os.path.basename(path), error=f"{type(exc).__name__}: {exc}")
    record = {
        "instrument_id": name,
        "source": os.path.basename(path),
        "n_prices": len(prices),
        "n_returns": n,
        "summary": stats.to_dict(),
        "unit_root": [o.to_dict() for o in unit_root],
        "ar_fit": resid.fit.to_dict(),
        "battery": [c.to_dict() for c in battery],
        "scan": report.to_dict(),
    }
    svg = timeline_svg(prices.dates, prices.prices, returns.dates, returns.values,
                       resid.source_dates, report, name) if config.svg else None
    return InstrumentResult(name, os.path.basename(path), record=record, svg=svg)


def build_report(results: list[InstrumentResult], config: AnalysisConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "epochscan", "version": __version__},
        "config": config.to_dict(),
        "instruments": [r.record for r in results if r.record is not None],
        "errors": [{"instrument_id": r.instrument_id, "source": r.source, "error": r.error}
                   for r in results if r.error is not None],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _umask() -> int:
    current = os.umask(0)
    os.umask(current)
    return current


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def summary_csv(doc: dict) -> str:
    fields = ["n", "mean", "min", "max", "stddev", "skewness", "kurtosis",
              "jb_statistic", "jb_pvalue"]
    rows = [["instrument_id"] + fields]
    for inst in doc["instruments"]:
        rows.append([inst["instrument_id"]] + [inst["summary"][f] for f in fields])
    return _csv(rows)


def unitroot_csv(doc: dict) -> str:
    rows = [["instrument_id", "test", "statistic", "critical_value_5pct", "reject_at_5pct", "lags"]]
    for inst in doc["instruments"]:
        for o in inst["unit_root"]:
            rows.append([inst["instrument_id"], o["test_name"], o["statistic"],
                         o["critical_value_5pct"], o["reject_at_5pct"], o["details"]["lags"]])
    return _csv(rows)


def battery_csv(doc: dict) -> str:
    """p-value grid: one row per test/setting, one column per instrument."""
    insts = doc["instruments"]
    rows = [["test", "setting"] + [i["instrument_id"] for i in insts]]
    rows.append(["AR order", ""] + [i["ar_fit"]["order"] for i in insts])
    if insts:
        for k, cell in enumerate(insts[0]["battery"]):
            row = [cell["test"], cell["setting"]]
            for inst in insts:
                c = inst["battery"][k]
                row.append(c["outcome"]["p_value"] if c["outcome"] else "error")
            rows.append(row)
    return _csv(rows)


def epochs_summary_csv(doc: dict) -> str:
    rows = [["instrument_id", "ar_order", "total_windows", "significant_windows",
             "significant_pct", "discarded_tail"]]
    for inst in doc["instruments"]:
        s = inst["scan"]
        frac = s["significant_fraction"]
        rows.append([inst["instrument_id"], s["ar_order_used"], s["total_windows"],
                     s["significant_windows"], None if frac is None else round(100 * frac, 2),
                     s["discarded_tail"]])
    return _csv(rows)


def epochs_csv(doc: dict) -> str:
    """One row per significant window."""
    rows = [["instrument_id", "window_index", "start_date", "end_date", "h_statistic", "p_value"]]
    for inst in doc["instruments"]:
        for w in inst["scan"]["windows"]:
            if w["significant"]:
                rows.append([inst["instrument_id"], w["index"], w["start_date"], w["end_date"],
                             w["h_statistic"], w["p_value"]])
    return _csv(rows)


def timeline_svg(price_dates, prices, return_dates, returns, resid_dates,
                 report: ScanReport, title: str) -> str:
    """Prices and returns with significant windows shaded."""
    from matplotlib import rc_context
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    with rc_context({"svg.hashsalt": "epochscan", "svg.fonttype": "none"}):
        fig = Figure(figsize=(10, 5))
        FigureCanvasSVG(fig)
        ax_p, ax_r = fig.subplots(2, 1, sharex=True)
        pd_ = price_dates.astype("datetime64[D]").astype(object)
        rd_ = return_dates.astype("datetime64[D]").astype(object)
        ax_p.plot(pd_, prices, lw=0.6, color="black")
        ax_r.plot(rd_, returns, lw=0.4, color="black")
        for w in report.significant():
            lo = resid_dates[w.start_offset].astype(object)
            hi = resid_dates[w.start_offset + w.n - 1].astype(object)
            for ax in (ax_p, ax_r):
                ax.axvspan(lo, hi, color="tab:red", alpha=0.3, lw=0)
        ax_p.set_ylabel("price")
        ax_r.set_ylabel("log return")
        frac = report.significant_fraction or 0.0
        ax_p.set_title(f"{title}: {report.significant_windows} of {report.total_windows} "
                       f"windows significant ({100 * frac:.2f}%)")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()
