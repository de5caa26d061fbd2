"""Detection and localization of nonlinear serial dependence in return series."""
from .armodel import ARFit, ResidualSeries, bic, fit_ar, prewhiten, select_order, standardize
from .epochs import (ScanReport, WindowResult, WindowSpec, bicorrelation, h_statistic,
                     partition_windows, scan, scan_residuals)
from .ingest import PriceSeries, ReturnSeries, SummaryStats, load_prices, log_returns, summary_stats
from .nonlin import BatteryConfig, arch_lm, bds, mcleod_li, run_battery, tsay
from .outcome import TestOutcome
from .synth import MonteCarloResult, ProcessSpec, empirical_power, empirical_size, generate
from .unitroot import adf, critical_values_rals, rals

__version__ = "0.1.0"
