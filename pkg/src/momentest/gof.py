"""Statistical assessment of density estimates against sampled data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import SampleData, empirical_moments
from .estimate import DensityEstimate, cdf_eval, moment_of_estimate
from .moments import MomentSet
from .specfun import chi2_inv_cdf

NOT_REJECTED = "NOT_REJECTED"
REJECTED = "REJECTED"


@dataclass(frozen=True)
class TestResult:
    test: str  # "ChiSquare" | "KS"
    statistic: float
    critical_value: float
    alpha: float
    verdict: str
    bins: int | None = None
    observed: tuple[float, ...] = ()
    expected: tuple[float, ...] = ()
    flagged_bins: tuple[int, ...] = ()

    def to_json(self) -> dict:
        doc = {
            "test": self.test,
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "verdict": self.verdict,
        }
        if self.test == "ChiSquare":
            doc["bins"] = self.bins
            doc["observed"] = list(self.observed)
            doc["expected"] = list(self.expected)
            doc["flagged_bins"] = list(self.flagged_bins)
        return doc


def verdict_of(statistic: float, critical_value: float) -> str:
    return NOT_REJECTED if statistic < critical_value else REJECTED


def chi_square_test(sample: np.ndarray, est: DensityEstimate, k: int = 15,
                    alpha: float = 0.05) -> TestResult:
    """Observed vs model-expected frequencies over k equal-width bins.

    Bins span [min(sample), max(sample)]; expected counts come from CDF
    differences of the estimate.  Bins whose expected count is not positive
    are flagged and skipped (never merged: that would silently change the
    k-1 degrees of freedom of the critical value).
    """
    data = np.asarray(sample, dtype=float)
    if data.size == 0:
        raise ValueError("sample is empty")
    if k < 2:
        raise ValueError("need at least two bins")
    edges = np.linspace(data.min(), data.max(), k + 1)
    if edges[0] == edges[-1]:
        edges = edges + np.linspace(0.0, 1e-9, k + 1)
    observed = np.histogram(data, bins=edges)[0].astype(float)
    masses = np.diff(cdf_eval(est, edges))
    expected = data.size * masses
    usable = expected > 1e-12
    flagged = tuple(int(i) for i in np.nonzero(~usable)[0])
    statistic = float(np.sum(
        (observed[usable] - expected[usable]) ** 2 / expected[usable]))
    critical = chi2_inv_cdf(1.0 - alpha, k - 1)
    return TestResult(
        test="ChiSquare",
        statistic=statistic,
        critical_value=critical,
        alpha=alpha,
        verdict=verdict_of(statistic, critical),
        bins=k,
        observed=tuple(float(v) for v in observed),
        expected=tuple(float(v) for v in expected),
        flagged_bins=flagged,
    )


def ks_critical_value(size: int, alpha: float) -> float:
    """sqrt(-(1/N) ln(alpha/2)); 0.0608 at N=1000, alpha=0.05."""
    return math.sqrt(-math.log(alpha / 2.0) / size)


def ks_test(sample: np.ndarray, est: DensityEstimate,
            alpha: float = 0.05) -> TestResult:
    """Supremum distance between the empirical CDF and the estimate's CDF.

    The empirical CDF is evaluated on both sides of every jump, so ties in
    the sample are handled exactly.
    """
    data = np.sort(np.asarray(sample, dtype=float))
    size = data.size
    if size == 0:
        raise ValueError("sample is empty")
    model = np.asarray(cdf_eval(est, data))
    steps = np.arange(1, size + 1) / size
    statistic = float(max(np.max(np.abs(model - steps)),
                          np.max(np.abs(model - (steps - 1.0 / size)))))
    critical = ks_critical_value(size, alpha)
    return TestResult(
        test="KS",
        statistic=statistic,
        critical_value=critical,
        alpha=alpha,
        verdict=verdict_of(statistic, critical),
    )


# ---------------------------------------------------------------------------
# Moment-error reporting


@dataclass(frozen=True)
class ErrorRow:
    order: int
    exact: float
    entries: tuple[tuple[str, float, float, float | None], ...]
    # (label, value, absolute error, relative error or None when exact == 0)


@dataclass(frozen=True)
class ErrorTable:
    var: str
    rows: tuple[ErrorRow, ...]
    labels: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "var": self.var,
            "columns": list(self.labels),
            "rows": [
                {
                    "order": row.order,
                    "exact": row.exact,
                    "entries": {
                        label: {"value": value, "abs_error": ae,
                                "rel_error": re}
                        for label, value, ae, re in row.entries
                    },
                }
                for row in self.rows
            ],
        }

    def to_csv(self) -> str:
        header = ["order", "exact"]
        for label in self.labels:
            header += [f"{label}", f"AE_{label}", f"RE_{label}"]
        lines = [",".join(header)]
        for row in self.rows:
            cells = [str(row.order), repr(row.exact)]
            for _, value, ae, re in row.entries:
                cells += [repr(value), repr(ae),
                          "undefined" if re is None else repr(re)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def relative(self, label: str, order: int) -> float | None:
        for row in self.rows:
            if row.order == order:
                for lab, _, _, re in row.entries:
                    if lab == label:
                        return re
        raise KeyError(f"no entry {label!r} at order {order}")


def _error_entry(label: str, value: float, exact: float):
    ae = abs(value - exact)
    re = ae / abs(exact) if exact != 0 else None
    return (label, value, ae, re)


def error_report(exact: MomentSet, data: SampleData,
                 estimates: list[DensityEstimate],
                 max_order: int | None = None) -> ErrorTable:
    """Absolute and relative moment errors of the sample and each estimate,
    all measured against the exact moments."""
    orders = exact.order if max_order is None else max_order
    if orders > exact.order:
        raise ValueError("exact moments do not cover the requested orders")
    sample_ms = empirical_moments(data, exact.var, orders)
    labels = ["Sample"] + [est.kind for est in estimates]
    rows = []
    for i in range(1, orders + 1):
        target = float(exact[i])
        entries = [_error_entry("Sample", sample_ms[i], target)]
        for est in estimates:
            entries.append(_error_entry(est.kind, moment_of_estimate(est, i),
                                        target))
        rows.append(ErrorRow(i, target, tuple(entries)))
    return ErrorTable(exact.var, tuple(rows), tuple(labels))


# ---------------------------------------------------------------------------
# Kernel density estimate (plot data)


def kde(sample: np.ndarray, bandwidth: float | None = None) -> np.ndarray:
    """Gaussian-kernel density curve as a (256, 2) array of (x, density).

    Default bandwidth is Silverman's 1.06 * std * e**(-1/5).
    """
    data = np.asarray(sample, dtype=float)
    if data.size == 0:
        raise ValueError("sample is empty")
    if bandwidth is None:
        std = float(np.std(data))
        bandwidth = 1.06 * std * data.size ** (-0.2)
    if bandwidth <= 0:
        bandwidth = max(1e-9, 1e-3 * max(1.0, abs(float(data[0]))))
    xs = np.linspace(data.min() - 3 * bandwidth, data.max() + 3 * bandwidth, 256)
    z = (xs[:, None] - data[None, :]) / bandwidth
    ys = np.exp(-0.5 * z * z).sum(axis=1) / (data.size * bandwidth
                                             * math.sqrt(2.0 * math.pi))
    return np.column_stack([xs, ys])
