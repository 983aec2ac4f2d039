"""Shared numeric kernels: Hermite and Bell polynomials, moment/cumulant
conversion, Gauss-Legendre quadrature and the chi-square inverse CDF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateVariance


def hermite_prob(m: int, x):
    """Probabilists' Hermite polynomial He_m(x).

    Uses He_{k+1} = x*He_k - k*He_{k-1}; accepts scalars or numpy arrays.
    """
    if m < 0:
        raise ValueError("order must be >= 0")
    prev = np.ones_like(np.asarray(x, dtype=float))
    if m == 0:
        return prev if np.ndim(x) else float(prev)
    cur = np.asarray(x, dtype=float)
    for k in range(1, m):
        prev, cur = cur, x * cur - k * prev
    return cur if np.ndim(x) else float(cur)


def bell_reduced_all(m: int, kappas) -> list[float]:
    """Complete Bell polynomials B_0..B_m at (0, 0, kappas[0], kappas[1], ...).

    ``kappas`` supplies the third and higher arguments; missing ones are
    treated as zero.  Uses B_{n+1} = sum_i C(n, i) B_{n-i} x_{i+1}.
    """
    args = [0.0, 0.0] + [float(k) for k in kappas]
    bell = [1.0]
    for n in range(m):
        total = 0.0
        for i in range(n + 1):
            x = args[i] if i < len(args) else 0.0
            if x != 0.0:
                total += math.comb(n, i) * bell[n - i] * x
        bell.append(total)
    return bell


def bell_reduced(m: int, kappas=()) -> float:
    """B_m(0, 0, k3, ..., km) for the cumulant tail ``kappas = (k3, ...)``."""
    return bell_reduced_all(m, kappas)[m]


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants k1..km; the first two double as the Gaussian reference."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("need at least two cumulants")

    @property
    def mean(self) -> float:
        return self.values[0]

    @property
    def variance(self) -> float:
        return self.values[1]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, order: int) -> float:
        """1-based access: cv[m] is the m-th cumulant."""
        return self.values[order - 1]


def raw_to_cumulants(moments) -> list[float]:
    """k_n = m_n - sum_{j<n} C(n-1, j-1) k_j m_{n-j} on raw moments."""
    ms = [float(v) for v in moments]
    kappas: list[float] = []
    for n in range(1, len(ms) + 1):
        acc = ms[n - 1]
        for j in range(1, n):
            acc -= math.comb(n - 1, j - 1) * kappas[j - 1] * ms[n - j - 1]
        kappas.append(acc)
    return kappas


def cumulants_to_raw(kappas) -> list[float]:
    """Inverse of raw_to_cumulants: m_n = sum_j C(n-1, j-1) k_j m_{n-j}."""
    ks = [float(v) for v in kappas]
    ms: list[float] = []
    for n in range(1, len(ks) + 1):
        acc = 0.0
        for j in range(1, n + 1):
            prev = 1.0 if n - j == 0 else ms[n - j - 1]
            acc += math.comb(n - 1, j - 1) * ks[j - 1] * prev
        ms.append(acc)
    return ms


def cumulant_determinant(moments, m: int) -> float:
    """m-th cumulant via the signed lower-Hessenberg moment determinant.

    Slower and numerically rougher than the recursion; retained as the
    reference formulation that the recursion is tested against.
    """
    ms = [float(v) for v in moments]
    if m < 1 or m > len(ms):
        raise ValueError("determinant needs moments up to order m")
    a = np.zeros((m, m))
    for i in range(1, m + 1):
        a[i - 1, 0] = ms[i - 1]
        for j in range(2, i + 2):
            if j > m:
                continue
            power = i - j + 1
            moment = 1.0 if power == 0 else ms[power - 1]
            a[i - 1, j - 1] = math.comb(i - 1, j - 2) * moment
    sign = -1.0 if m % 2 == 0 else 1.0
    return sign * float(np.linalg.det(a))


def cumulants_from_moments(ms) -> CumulantVector:
    """CumulantVector from a MomentSet (or any sequence of raw moments).

    Raises DegenerateVariance when the implied variance is not positive.
    """
    values = getattr(ms, "float_values", None)
    moments = list(values) if values is not None else [float(v) for v in ms]
    if len(moments) < 2:
        raise ValueError("need at least the first two moments")
    kappas = raw_to_cumulants(moments)
    if kappas[1] <= 0:
        raise DegenerateVariance(f"variance {kappas[1]} is not positive")
    return CumulantVector(tuple(kappas))


def moments_from_cumulants(cv: CumulantVector):
    """Raw moments matching ``cv``; the round-trip inverse of
    cumulants_from_moments (returned as an externally-sourced MomentSet)."""
    from .moments import MomentSet

    return MomentSet(var="x", n=0,
                     values=tuple(cumulants_to_raw(cv.values)),
                     provenance="external")


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Legendre nodes and weights on [lower, upper]."""

    lower: float
    upper: float
    order: int
    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    @property
    def nodes_array(self) -> np.ndarray:
        return np.asarray(self.nodes)

    @property
    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights_array, f(self.nodes_array)))


@lru_cache(maxsize=None)
def _legendre_nodes(order: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Roots of P_order and weights on [-1, 1] by Newton iteration."""
    nodes = []
    weights = []
    for i in range(1, order + 1):
        x = math.cos(math.pi * (i - 0.25) / (order + 0.5))
        for _ in range(100):
            p_prev, p = 1.0, x
            for k in range(2, order + 1):
                p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
            dp = order * (x * p - p_prev) / (x * x - 1.0)
            step = p / dp
            x -= step
            if abs(step) < 1e-15:
                break
        p_prev, p = 1.0, x
        for k in range(2, order + 1):
            p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        dp = order * (x * p - p_prev) / (x * x - 1.0)
        nodes.append(x)
        weights.append(2.0 / ((1.0 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def gauss_legendre(lower: float, upper: float, order: int) -> Quadrature:
    """Quadrature exact for polynomials of degree <= 2*order - 1."""
    if not lower < upper:
        raise ValueError("need lower < upper")
    if order < 1:
        raise ValueError("order must be >= 1")
    ref_nodes, ref_weights = _legendre_nodes(order)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    nodes = tuple(mid + half * x for x in ref_nodes)
    weights = tuple(half * w for w in ref_weights)
    return Quadrature(float(lower), float(upper), order, nodes, weights)


# ---------------------------------------------------------------------------
# Chi-square quantile via the regularized incomplete gamma function
# (series for x < a+1, Lentz continued fraction otherwise; cf. NR ch. 6)


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(500):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-15:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_contfrac(a, x)


def chi2_cdf(x: float, df: int) -> float:
    return gamma_p(df / 2.0, x / 2.0) if x > 0 else 0.0


def chi2_inv_cdf(p: float, df: int) -> float:
    """Chi-square quantile by bisection on the regularized gamma CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if df < 1:
        raise ValueError("df must be >= 1")
    lo = 0.0
    hi = df + 10.0 * math.sqrt(2.0 * df) + 10.0
    while chi2_cdf(hi, df) < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * (1.0 + hi):
            break
    return 0.5 * (lo + hi)
