"""Density estimates from a finite list of raw moments.

Two families are supported on a working interval [l, u]:

* ``ME``: the entropy-maximizing density exp[-sum_j xi_j x**j] whose first
  m moments match the inputs; the multipliers solve a square nonlinear
  system by damped Gauss-Newton (Levenberg-Marquardt).
* ``GC``: the Gaussian-reference series psi(x) * sum_j B_j/(j! sigma**j) *
  He_j((x-mu)/sigma) truncated at the number of supplied moments, with the
  B_j evaluated on the cumulant tail.  The truncated series is kept
  unnormalized; its mass defect is visible through ``cdf_eval`` at ``u``.

Fitting is performed in standardized coordinates (zero mean, unit variance)
and the multipliers are mapped back, otherwise the power-moment Gram matrix
is numerically hopeless for m >= 5.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateVariance, SingularSystem
from .moments import MomentSet
from .specfun import (
    CumulantVector,
    bell_reduced_all,
    cumulants_from_moments,
    gauss_legendre,
)

QUAD_ORDER = 64
CDF_PANELS = 64


@dataclass(frozen=True)
class DensityEstimate:
    """An evaluable pdf on [l, u]; either multiplier- or cumulant-based."""

    kind: str  # "ME" | "GC"
    support: tuple[float, float]
    xi: tuple[float, ...] | None = None
    cumulants: tuple[float, ...] | None = None
    order: int = 0

    def __post_init__(self):
        if not self.support[0] < self.support[1]:
            raise ValueError("need l < u")
        if self.kind not in ("ME", "GC"):
            raise ValueError(f"unknown estimate kind {self.kind!r}")

    @property
    def mean(self) -> float:
        if self.kind != "GC":
            raise ValueError("Gaussian reference defined for GC only")
        return self.cumulants[0]

    @property
    def variance(self) -> float:
        if self.kind != "GC":
            raise ValueError("Gaussian reference defined for GC only")
        return self.cumulants[1]

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "support": list(self.support)}
        if self.kind == "ME":
            doc["xi"] = list(self.xi)
        else:
            doc["cumulants"] = list(self.cumulants)
            doc["order"] = self.order
        return doc

    @staticmethod
    def from_json(doc: dict) -> "DensityEstimate":
        kind = doc["kind"]
        support = (float(doc["support"][0]), float(doc["support"][1]))
        if kind == "ME":
            xi = tuple(float(v) for v in doc["xi"])
            return DensityEstimate("ME", support, xi=xi, order=len(xi) - 1)
        cumulants = tuple(float(v) for v in doc["cumulants"])
        return DensityEstimate("GC", support, cumulants=cumulants,
                               order=int(doc["order"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "DensityEstimate":
        return DensityEstimate.from_json(json.loads(text))


@dataclass(frozen=True)
class FitDiagnostics:
    iterations: int
    residual_norm: float
    converged: bool
    constraint_residuals: tuple[float, ...] = ()
    entropy: float | None = None


# ---------------------------------------------------------------------------
# Levenberg-Marquardt


def levenberg_marquardt(residual, jacobian, x0, *, tol=1e-10, max_iter=200,
                        lambda0=1e-3, lambda_factor=10.0, lambda_max=1e12):
    """Damped Gauss-Newton on a (possibly non-square) residual system.

    Converges when the residual infinity-norm falls below ``tol`` or the
    step is smaller than ``tol * (1 + |x|)``; otherwise the best iterate is
    returned with ``converged=False``.  SingularSystem is raised when the
    damped normal matrix stays unsolvable at the damping ceiling.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = np.asarray(residual(x), dtype=float)
    cost = float(r @ r)
    best_x, best_r = x.copy(), r.copy()
    lam = lambda0
    iterations = 0
    converged = float(np.max(np.abs(r))) <= tol
    with np.errstate(over="ignore", invalid="ignore"):
        while not converged and iterations < max_iter:
            iterations += 1
            j = np.asarray(jacobian(x), dtype=float)
            g = j.T @ r
            jtj = j.T @ j
            accepted = None
            while accepted is None:
                try:
                    step = np.linalg.solve(jtj + lam * np.eye(len(x)), -g)
                except np.linalg.LinAlgError:
                    lam *= lambda_factor
                    if lam > lambda_max:
                        raise SingularSystem(
                            "damped normal matrix is singular") from None
                    continue
                x_new = x + step
                r_new = np.asarray(residual(x_new), dtype=float)
                cost_new = float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    accepted = step
                    lam = max(lam / lambda_factor, 1e-15)
                    x, r, cost = x_new, r_new, cost_new
                else:
                    lam *= lambda_factor
                    if lam > lambda_max:
                        break
            if accepted is None:
                break
            if cost <= float(best_r @ best_r):
                best_x, best_r = x.copy(), r.copy()
            converged = (
                float(np.max(np.abs(r))) <= tol
                or float(np.linalg.norm(accepted))
                <= tol * (1.0 + float(np.linalg.norm(x)))
            )
    diagnostics = FitDiagnostics(
        iterations=iterations,
        residual_norm=float(np.max(np.abs(best_r))),
        converged=bool(converged and np.all(np.isfinite(best_x))),
        constraint_residuals=tuple(float(v) for v in best_r),
    )
    return best_x, diagnostics


# ---------------------------------------------------------------------------
# Maximum entropy


def _standardized_moments(values: tuple[float, ...]) -> tuple[float, float, list[float]]:
    mu = values[0]
    var = values[1] - mu * mu if len(values) > 1 else None
    if var is not None and var <= 0:
        raise DegenerateVariance(f"variance {var:.6g} is not positive")
    sigma = math.sqrt(var) if var is not None else 1.0
    full = [1.0, *values]
    std = []
    for i in range(len(values) + 1):
        acc = 0.0
        for j in range(i + 1):
            acc += math.comb(i, j) * (-mu) ** (i - j) * full[j]
        std.append(acc / sigma ** i)
    return mu, sigma, std


def _xi_to_original(xi_std: np.ndarray, mu: float, sigma: float) -> tuple[float, ...]:
    """Map multipliers for y=(x-mu)/sigma back to x coordinates."""
    m = len(xi_std) - 1
    xi = [0.0] * (m + 1)
    for j, c in enumerate(xi_std):
        # c * ((x - mu)/sigma)**j contributes binomially to all lower powers.
        for k in range(j + 1):
            xi[k] += float(c) * math.comb(j, k) * (-mu) ** (j - k) / sigma ** j
    xi[0] += math.log(sigma)
    return tuple(float(v) for v in xi)


def fit_max_entropy(ms: MomentSet, support: tuple[float, float], *,
                    tol=1e-10, max_iter=200,
                    quad_order=QUAD_ORDER) -> tuple[DensityEstimate, FitDiagnostics]:
    """Solve the m+1 moment-constraint equations for the ME multipliers.

    Residuals are relative (each equation scaled by max(1, |target|)); the
    Jacobian d r_i / d xi_j = -integral y**(i+j) pdf dy comes from the same
    quadrature as the residuals.  The initial iterate is the Gaussian that
    matches the first two moments, which in standardized coordinates is
    always (ln sqrt(2 pi), 0, 1/2, 0, ..., 0).
    """
    lower, upper = float(support[0]), float(support[1])
    if not lower < upper:
        raise ValueError("need l < u")
    values = ms.float_values
    m = len(values)
    if m >= 2:
        mu, sigma, targets = _standardized_moments(values)
    else:
        mu, sigma, targets = 0.0, 1.0, [1.0, *values]
    quad = gauss_legendre((lower - mu) / sigma, (upper - mu) / sigma, quad_order)
    nodes = quad.nodes_array
    weights = quad.weights_array
    powers = np.vander(nodes, 2 * m + 1, increasing=True).T  # powers[i] = y**i
    targets = np.asarray(targets)
    scale = np.maximum(1.0, np.abs(targets))

    def pdf_values(xi: np.ndarray) -> np.ndarray:
        exponent = powers[: m + 1].T @ xi
        with np.errstate(over="ignore"):
            return np.exp(-exponent)

    def residual(xi: np.ndarray) -> np.ndarray:
        p = pdf_values(xi)
        integrals = powers[: m + 1] @ (weights * p)
        return (integrals - targets) / scale

    def jacobian(xi: np.ndarray) -> np.ndarray:
        p = weights * pdf_values(xi)
        out = np.empty((m + 1, m + 1))
        for i in range(m + 1):
            for j in range(m + 1):
                out[i, j] = -float(powers[i + j] @ p)
        return out / scale[:, None]

    x0 = np.zeros(m + 1)
    x0[0] = math.log(math.sqrt(2.0 * math.pi))
    if m >= 2:
        x0[2] = 0.5
    else:
        x0[0] = math.log(quad.upper - quad.lower)
    xi_std, diagnostics = levenberg_marquardt(
        residual, jacobian, x0, tol=tol, max_iter=max_iter)
    estimate = DensityEstimate(
        "ME", (lower, upper), xi=_xi_to_original(xi_std, mu, sigma), order=m)
    diagnostics = FitDiagnostics(
        iterations=diagnostics.iterations,
        residual_norm=diagnostics.residual_norm,
        converged=diagnostics.converged,
        constraint_residuals=diagnostics.constraint_residuals,
        entropy=entropy_of_estimate(estimate),
    )
    return estimate, diagnostics


# ---------------------------------------------------------------------------
# Gaussian-reference series


def default_support(ms: MomentSet, spread: float = 8.0) -> tuple[float, float]:
    """mu +- spread * sigma from the first two moments."""
    values = ms.float_values
    if len(values) < 2:
        raise ValueError("need two moments for a default support")
    mu = values[0]
    var = values[1] - mu * mu
    if var <= 0:
        raise DegenerateVariance(f"variance {var:.6g} is not positive")
    sigma = math.sqrt(var)
    return (mu - spread * sigma, mu + spread * sigma)


def fit_gram_charlier(ms: MomentSet,
                      support: tuple[float, float] | None = None) -> DensityEstimate:
    """Series estimate truncated at the number of supplied moments.

    With exactly two moments every correction term vanishes and the result
    is the moment-matching Gaussian itself.
    """
    cv: CumulantVector = cumulants_from_moments(ms)
    if support is None:
        support = default_support(ms)
    return DensityEstimate("GC", (float(support[0]), float(support[1])),
                           cumulants=tuple(cv.values), order=len(cv))


def _gc_coefficients(cumulants: tuple[float, ...], order: int) -> np.ndarray:
    sigma = math.sqrt(cumulants[1])
    bell = bell_reduced_all(order, cumulants[2:])
    return np.array([bell[j] / (math.factorial(j) * sigma ** j)
                     for j in range(order + 1)])


# ---------------------------------------------------------------------------
# Evaluation


def pdf_eval(est: DensityEstimate, x):
    """Density at x (0 outside the support); scalar or array."""
    arr = np.asarray(x, dtype=float)
    lower, upper = est.support
    inside = (arr >= lower) & (arr <= upper)
    if est.kind == "ME":
        exponent = np.zeros_like(arr)
        for j in range(len(est.xi) - 1, -1, -1):
            exponent = exponent * arr + est.xi[j]
        with np.errstate(over="ignore"):
            out = np.exp(-exponent)
    else:
        mu = est.cumulants[0]
        sigma = math.sqrt(est.cumulants[1])
        y = (arr - mu) / sigma
        psi = np.exp(-0.5 * y * y) / (sigma * math.sqrt(2.0 * math.pi))
        coeffs = _gc_coefficients(est.cumulants, est.order)
        series = np.zeros_like(arr)
        he_prev = np.ones_like(arr)
        he = y.copy() if est.order >= 1 else None
        series += coeffs[0] * he_prev
        for j in range(1, est.order + 1):
            series += coeffs[j] * he
            he_prev, he = he, y * he - j * he_prev
        out = psi * series
    out = np.where(inside, out, 0.0)
    return out if out.ndim else float(out)


@lru_cache(maxsize=128)
def _cdf_table(est: DensityEstimate):
    """Prefix masses at 65 equal panel boundaries plus the panel quadrature."""
    lower, upper = est.support
    edges = np.linspace(lower, upper, CDF_PANELS + 1)
    ref = gauss_legendre(-1.0, 1.0, QUAD_ORDER)
    ref_nodes = ref.nodes_array
    ref_weights = ref.weights_array
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = mids[:, None] + half * ref_nodes[None, :]
    masses = half * (pdf_eval(est, nodes) @ ref_weights)
    prefix = np.concatenate([[0.0], np.cumsum(masses)])
    return edges, prefix, ref_nodes, ref_weights


def cdf_eval(est: DensityEstimate, x):
    """integral_l^x pdf, clamped to [0, total mass] outside the support."""
    edges, prefix, ref_nodes, ref_weights = _cdf_table(est)
    lower, upper = est.support
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    clipped = np.clip(arr, lower, upper)
    width = edges[1] - edges[0]
    idx = np.minimum(((clipped - lower) / width).astype(int), CDF_PANELS - 1)
    left = edges[idx]
    half = 0.5 * (clipped - left)
    mids = left + half
    nodes = mids[:, None] + half[:, None] * ref_nodes[None, :]
    partial = half * (pdf_eval(est, nodes) @ ref_weights)
    out = prefix[idx] + partial
    out = np.clip(out, 0.0, None)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def total_mass(est: DensityEstimate) -> float:
    """integral over the whole support (1 - mass defect for GC)."""
    _, prefix, _, _ = _cdf_table(est)
    return float(prefix[-1])


def _composite_integral(est: DensityEstimate, weight) -> float:
    edges, _, ref_nodes, ref_weights = _cdf_table(est)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = mids[:, None] + half * ref_nodes[None, :]
    values = pdf_eval(est, nodes) * weight(nodes)
    return float(half * np.sum(values @ ref_weights))


def moment_of_estimate(est: DensityEstimate, i: int) -> float:
    """Normalized i-th raw moment of the estimate on its support."""
    if i < 0:
        raise ValueError("order must be >= 0")
    mass = total_mass(est)
    if mass <= 0:
        raise DegenerateVariance("estimate carries no positive mass")
    return _composite_integral(est, lambda x: x ** i) / mass


def entropy_of_estimate(est: DensityEstimate) -> float:
    """Differential entropy -integral pdf ln pdf over the support."""

    def weight(x):
        p = pdf_eval(est, x)
        out = np.zeros_like(p)
        positive = p > 1e-300
        out[positive] = -np.log(p[positive])
        return out

    return _composite_integral(est, weight)
