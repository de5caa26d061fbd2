"""Seeded data-generating processes and the Monte Carlo size/power harness.

Families (``ProcessSpec.family`` and its ``params``):

==============  ==========================================================
gaussian_iid    ``e_t ~ N(0, 1)``
student_t_iid   ``t(df)`` draws; params ``df``
garch11         ``e_t = sigma_t z_t``, ``sigma_t^2 = omega + alpha e_{t-1}^2 + beta sigma_{t-1}^2``
bilinear        ``x_t = e_t + b x_{t-2} e_{t-1}``; serially uncorrelated but
                with nonzero third-order moments; params ``b``
tar             ``x_t = phi_low x_{t-1} + e_t`` if ``x_{t-1} <= threshold``
                else ``phi_high x_{t-1} + e_t``
logistic_map    ``x_{t+1} = 4 x_t (1 - x_t)``; params ``x0`` (drawn from the
                stream when omitted)
random_walk     cumulative sum of ``N(0, 1)`` increments
ar              Gaussian AR with params ``coefficients``
exponential_iid centered unit exponential (skewed, mean zero)
episodic        params ``base`` and ``burst`` (nested family specs) and
                ``ranges`` (list of ``[start, stop)`` offsets where the burst
                process replaces the base process)
==============  ==========================================================

Recursive families discard ``burn_in`` (default 500) initial values; the
logistic map discards 100 and i.i.d. families none.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Any, Optional

import numpy as np

from . import epochs, ingest, nonlin, unitroot
from ._parallel import chunked, ordered_map
from ._rng import substream
from .distributions import NullDistribution
from .errors import EpochScanError
from .outcome import TestOutcome

FAMILIES = (
    "gaussian_iid", "student_t_iid", "exponential_iid", "garch11", "bilinear", "tar",
    "logistic_map", "random_walk", "ar", "episodic",
)
_RECURSIVE = {"garch11", "bilinear", "tar", "ar"}
MIN_REPLICATIONS = 100


@dataclass(frozen=True)
class ProcessSpec:
    family: str
    n: int
    seed: int = 0
    burn_in: Optional[int] = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown process family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        _validate(self.family, self.params)

    @property
    def effective_burn_in(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        if self.family in _RECURSIVE:
            return 500
        if self.family == "logistic_map":
            return 100
        return 0

    def to_dict(self) -> dict:
        return {"family": self.family, "n": self.n, "seed": self.seed,
                "burn_in": self.burn_in, "params": self.params}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProcessSpec":
        unknown = set(doc) - {"family", "n", "seed", "burn_in", "params"}
        if unknown:
            raise ValueError(f"unknown process spec fields: {sorted(unknown)}")
        return cls(doc["family"], int(doc["n"]), int(doc.get("seed", 0)),
                   doc.get("burn_in"), dict(doc.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        return cls.from_dict(json.loads(text))


def _validate(family: str, params: dict) -> None:
    p = params
    if family == "student_t_iid":
        if not p.get("df", 0) > 0:
            raise ValueError("student_t_iid requires df > 0")
    elif family == "garch11":
        omega, alpha, beta = p.get("omega"), p.get("alpha"), p.get("beta")
        if omega is None or alpha is None or beta is None:
            raise ValueError("garch11 requires omega, alpha and beta")
        if not omega > 0 or alpha < 0 or beta < 0 or alpha + beta >= 1:
            raise ValueError("garch11 requires omega > 0, alpha, beta >= 0, alpha + beta < 1")
    elif family == "bilinear":
        if "b" not in p:
            raise ValueError("bilinear requires b")
        if abs(p["b"]) >= 1:
            raise ValueError("bilinear requires |b| < 1")
    elif family == "tar":
        for key in ("threshold", "phi_low", "phi_high"):
            if key not in p:
                raise ValueError(f"tar requires {key}")
    elif family == "logistic_map":
        x0 = p.get("x0")
        if x0 is not None and (not 0 < x0 < 1 or math.isclose(x0, 0.75)):
            raise ValueError("logistic_map requires x0 in (0, 1) away from the fixed point 0.75")
    elif family == "ar":
        coefs = p.get("coefficients")
        if coefs is None:
            raise ValueError("ar requires coefficients")
        roots = np.roots(np.r_[1.0, -np.asarray(coefs, float)]) if len(coefs) else []
        if len(roots) and np.max(np.abs(roots)) >= 1:
            raise ValueError("ar coefficients must describe a stationary process")
    elif family == "episodic":
        for key in ("base", "burst", "ranges"):
            if key not in p:
                raise ValueError(f"episodic requires {key}")
        for sub in (p["base"], p["burst"]):
            if sub.get("family") in (None, "episodic") or sub["family"] not in FAMILIES:
                raise ValueError("episodic base/burst must name a non-episodic family")
            _validate(sub["family"], sub.get("params", {}))
        for rng_ in p["ranges"]:
            if len(rng_) != 2 or not 0 <= rng_[0] < rng_[1]:
                raise ValueError("episodic ranges must be [start, stop) pairs")


def _draw(family: str, params: dict, n: int, burn: int, rng: np.random.Generator) -> np.ndarray:
    total = n + burn
    if family == "gaussian_iid":
        out = rng.standard_normal(total)
    elif family == "student_t_iid":
        out = rng.standard_t(params["df"], total)
    elif family == "exponential_iid":
        out = rng.standard_exponential(total) - 1.0
    elif family == "random_walk":
        out = np.cumsum(rng.standard_normal(total))
    elif family == "garch11":
        omega, alpha, beta = params["omega"], params["alpha"], params["beta"]
        z = rng.standard_normal(total)
        out = np.empty(total)
        var = omega / (1.0 - alpha - beta)
        for t in range(total):
            out[t] = math.sqrt(var) * z[t]
            var = omega + alpha * out[t] ** 2 + beta * var
    elif family == "bilinear":
        b = params["b"]
        e = rng.standard_normal(total)
        out = np.empty(total)
        out[:2] = e[:2]
        for t in range(2, total):
            out[t] = e[t] + b * out[t - 2] * e[t - 1]
    elif family == "tar":
        thr, lo, hi = params["threshold"], params["phi_low"], params["phi_high"]
        e = rng.standard_normal(total)
        out = np.empty(total)
        prev = 0.0
        for t in range(total):
            prev = (lo if prev <= thr else hi) * prev + e[t]
            out[t] = prev
    elif family == "ar":
        phi = np.asarray(params["coefficients"], float)
        p = phi.shape[0]
        e = rng.standard_normal(total)
        out = np.zeros(total)
        for t in range(total):
            acc = e[t]
            for i in range(min(p, t)):
                acc += phi[i] * out[t - 1 - i]
            out[t] = acc
    elif family == "logistic_map":
        x = params.get("x0")
        if x is None:
            x = float(rng.uniform(0.01, 0.99))
        out = np.empty(total)
        for t in range(total):
            out[t] = x
            x = 4.0 * x * (1.0 - x)
        tail = out[burn:]
        if np.any(tail <= 0.0) or np.ptp(tail[-10:]) == 0.0:
            raise EpochScanError("logistic map orbit collapsed onto a fixed point")
    else:
        raise ValueError(f"cannot draw family {family!r}")
    return out[burn:]


def _sub_burn(sub: dict) -> int:
    if sub.get("burn_in") is not None:
        return int(sub["burn_in"])
    return ProcessSpec(sub["family"], 1, params=sub.get("params", {})).effective_burn_in


def generate(spec: ProcessSpec, substream_index: int = 0) -> np.ndarray:
    """Draw ``spec.n`` observations; output depends only on the spec and index."""
    rng = substream(spec.seed, substream_index)
    if spec.family != "episodic":
        return _draw(spec.family, spec.params, spec.n, spec.effective_burn_in, rng)
    base, burst = spec.params["base"], spec.params["burst"]
    out = _draw(base["family"], base.get("params", {}), spec.n, _sub_burn(base), rng)
    alt = _draw(burst["family"], burst.get("params", {}), spec.n, _sub_burn(burst), rng)
    for start, stop in spec.params["ranges"]:
        stop = min(int(stop), spec.n)
        out[int(start):stop] = alt[int(start):stop]
    return out


# --- Monte Carlo harness -------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    """Empirical rejection frequency of one test on one process.

    ``trials`` counts Bernoulli outcomes; it equals ``replications`` except
    for the pooled window-level H test, where every window of every series
    is one trial. ``standard_error = sqrt(r (1 - r) / trials)``.
    """

    test_id: str
    mode: str
    process: dict
    replications: int
    trials: int
    alpha: float
    seed: int
    rejection_rate: float
    standard_error: float

    def to_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "mode": self.mode,
            "process": self.process,
            "replications": self.replications,
            "trials": self.trials,
            "alpha": self.alpha,
            "seed": self.seed,
            "rejection_rate": self.rejection_rate,
            "standard_error": self.standard_error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        cols = ["test_id", "mode", "family", "n", "replications", "trials", "alpha", "seed",
                "rejection_rate", "standard_error"]
        row = [self.test_id, self.mode, self.process["family"], self.process["n"],
               self.replications, self.trials, repr(self.alpha), self.seed,
               repr(self.rejection_rate), repr(self.standard_error)]
        return ",".join(cols) + "\n" + ",".join(str(v) for v in row) + "\n"


@dataclass(frozen=True)
class _TestRunner:
    """Turns one simulated series into ``(rejections, trials)``."""

    kind: str
    args: tuple = ()
    rals_table: Optional[unitroot.CriticalValueTable] = None

    def __call__(self, x: np.ndarray, alpha: float) -> tuple[int, int]:
        if self.kind == "h_test":
            window, c = self.args
            spec = epochs.WindowSpec(window, c, alpha if alpha > 0 else 0.05)
            report = epochs.scan(x, spec)
            valid = [w for w in report.windows if not w.degenerate]
            if alpha <= 0:
                return 0, len(valid)
            return sum(w.p_value < alpha for w in valid), len(valid)
        outcome = self.outcome(x)
        return int(outcome.rejects(alpha)), 1

    def outcome(self, x):
        k, a = self.kind, self.args
        if k == "jarque_bera":
            st = ingest.summary_stats(x)
            return TestOutcome.from_p_value("Jarque-Bera", st.jb_statistic,
                                            NullDistribution.chi2(2), st.jb_pvalue)
        if k == "mcleod_li":
            return nonlin.mcleod_li(x, *a)
        if k == "tsay":
            return nonlin.tsay(x, *a)
        if k == "arch_lm":
            return nonlin.arch_lm(x, *a)
        if k == "bds":
            m, mult = a
            return nonlin.bds(x, m, mult * float(np.std(x, ddof=1)))
        if k == "adf":
            return unitroot.adf(x)
        if k == "rals":
            return unitroot.rals(x, critical_values=self.rals_table)
        raise ValueError(k)


_ID_PATTERNS = {
    "jarque_bera": (r"jarque_bera", ()),
    "mcleod_li": (r"mcleod_li(?::(\d+))?", (5,)),
    "tsay": (r"tsay(?::(\d+))?", (5,)),
    "arch_lm": (r"arch_lm(?::(\d+))?", (5,)),
    "bds": (r"bds(?::(\d+):([0-9.]+))?", (2, 0.5)),
    "adf": (r"adf", ()),
    "rals": (r"rals", ()),
    "h_test": (r"h_test(?::(\d+):([0-9.]+))?", (28, 0.4)),
}

TEST_IDS = tuple(_ID_PATTERNS)


def parse_test_id(test_id: str) -> tuple[str, tuple]:
    """Parse ids such as ``mcleod_li:15``, ``bds:2:0.5``, ``h_test:28:0.4``."""
    for kind, (pattern, defaults) in _ID_PATTERNS.items():
        m = re.fullmatch(pattern, test_id)
        if m is None:
            continue
        groups = m.groups()
        if not groups or groups[0] is None:
            return kind, defaults
        conv = [float(g) if "." in g else int(g) for g in groups]
        if kind == "bds":
            conv = [int(conv[0]), float(conv[1])]
        if kind == "h_test":
            conv = [int(conv[0]), float(conv[1])]
        return kind, tuple(conv)
    raise ValueError(f"unknown test_id {test_id!r}")


def _replication_block(indices: range, runner: _TestRunner, template: ProcessSpec,
                       alpha: float) -> tuple[int, int]:
    rej = tri = 0
    for i in indices:
        x = generate(template, i)
        r, t = runner(x, alpha)
        rej += r
        tri += t
    return rej, tri


def _monte_carlo(mode: str, test_id: str, template: ProcessSpec, replications: int,
                 alpha: float, seed: int, workers: int, rals_replications: int) -> MonteCarloResult:
    kind, args = parse_test_id(test_id)
    if replications < MIN_REPLICATIONS:
        raise ValueError(f"need at least {MIN_REPLICATIONS} replications")
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    table = None
    if kind == "rals":
        table = unitroot.critical_values_rals(
            template.n, rals_replications, seed=(seed + 1) & ((1 << 64) - 1), workers=workers)
    runner = _TestRunner(kind, args, table)
    spec = replace(template, seed=seed)
    job = partial(_replication_block, runner=runner, template=spec, alpha=alpha)
    blocks = ordered_map(job, chunked(replications, max(1, workers) * 4), workers)
    rej = sum(b[0] for b in blocks)
    trials = sum(b[1] for b in blocks)
    rate = rej / trials if trials else 0.0
    se = math.sqrt(rate * (1.0 - rate) / trials) if trials else 0.0
    proc = template.to_dict()
    proc["seed"] = None
    return MonteCarloResult(test_id, mode, proc, replications, trials, alpha, seed, rate, se)


def empirical_size(test_id: str, null_spec: ProcessSpec, replications: int = 1000,
                   alpha: float = 0.05, seed: int = 0, workers: int = 1,
                   rals_replications: int = 10000) -> MonteCarloResult:
    """Rejection frequency of ``test_id`` on fresh draws from a null process.

    Replication ``i`` uses substream ``i`` of ``seed``; ``null_spec.seed`` is
    ignored. Results do not depend on ``workers``.
    """
    return _monte_carlo("size", test_id, null_spec, replications, alpha, seed, workers,
                        rals_replications)


def empirical_power(test_id: str, alt_spec: ProcessSpec, replications: int = 500,
                    alpha: float = 0.05, seed: int = 0, workers: int = 1,
                    rals_replications: int = 10000) -> MonteCarloResult:
    """As :func:`empirical_size`, for an alternative-hypothesis process."""
    return _monte_carlo("power", test_id, alt_spec, replications, alpha, seed, workers,
                        rals_replications)
