"""Vectors of m-runs and their explicit normal-approximation bound.

An m-run with coefficients ``a`` over inputs ``X_0, ..., X_{n+m-2}`` is

    F = sum_{i<n} a[i] * (X_i ... X_{i+m-1} - mu_i ... mu_{i+m-1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import core
from .bounds import BoundReport, SmoothnessConstants
from .core import ComponentDistribution, ProductModel, StatisticVector

ENUMERATION_LIMIT = 16


@dataclass(frozen=True)
class RunsSpec:
    m: tuple[int, ...]
    a: tuple[np.ndarray, ...]
    components: tuple[ComponentDistribution, ...]

    def __post_init__(self):
        m = tuple(int(x) for x in self.m)
        a = tuple(np.asarray(x, dtype=float).ravel() for x in self.a)
        if not m or any(x < 1 for x in m) or list(m) != sorted(m):
            raise ValueError(f"window lengths must be positive and nondecreasing, got {m}")
        if len(a) != len(m):
            raise ValueError("need one coefficient array per run")
        n = a[0].size
        if n < 1 or any(x.size != n for x in a):
            raise ValueError("coefficient arrays must share a positive length n")
        comps = tuple(self.components)
        if len(comps) != n + m[-1] - 1:
            raise ValueError(f"need n + m_d - 1 = {n + m[-1] - 1} input laws, got {len(comps)}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "components", comps)

    @property
    def d(self) -> int:
        return len(self.m)

    @property
    def n(self) -> int:
        return self.a[0].size

    @property
    def model(self) -> ProductModel:
        return ProductModel(self.components)

    def means(self) -> np.ndarray:
        return np.array([c.mean() for c in self.components])


def bernoulli_runs_spec(n: int, d: int, p: float) -> RunsSpec:
    """``W_j = sum_i (X_i ... X_{i+j-1} - p^j) / sqrt(n p^j (1-p))`` for ``j = 1..d``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    a = [np.full(n, 1.0 / math.sqrt(n * p**j * (1.0 - p))) for j in range(1, d + 1)]
    return RunsSpec(tuple(range(1, d + 1)), tuple(a), (core.bernoulli(p),) * (n + d - 1))


def _window_products(X: np.ndarray, m: int, n: int) -> np.ndarray:
    out = np.ones((X.shape[0], n))
    for s in range(m):
        out *= X[:, s : s + n]
    return out


def build_runs_statistic(spec: RunsSpec) -> StatisticVector:
    mu = spec.means()
    n = spec.n
    centres = [float(_window_products(mu[None, :], m, n)[0] @ a) for m, a in zip(spec.m, spec.a)]

    def func(X):
        return np.stack(
            [_window_products(X, m, n) @ a - c for m, a, c in zip(spec.m, spec.a, centres)], axis=1
        )

    def closed_diff(k, X, value):
        # F is affine in X_k: increment = (value - X_k) * sum over windows through k of a_i * prod_{l != k} X_l
        value = np.asarray(value, dtype=float)
        out = np.zeros((X.shape[0], spec.d))
        for j, (m, a) in enumerate(zip(spec.m, spec.a)):
            for i in range(max(0, k - m + 1), min(n - 1, k) + 1):
                others = np.ones(X.shape[0])
                for l in range(i, i + m):
                    if l != k:
                        others = others * X[:, l]
                out[:, j] += a[i] * others
        return out * (value - X[:, k])[:, None]

    return StatisticVector(func, spec.d, closed_diff=closed_diff, name="runs")


def runs_difference(spec: RunsSpec, X: np.ndarray, k: int) -> np.ndarray:
    """``D_k F`` from the window expansion: windows through ``k`` times ``(X_k - mu_k)``."""
    mu = spec.means()
    X = np.atleast_2d(X)
    out = np.zeros((X.shape[0], spec.d))
    for j, (m, a) in enumerate(zip(spec.m, spec.a)):
        for i in range(max(0, k - m + 1), min(spec.n - 1, k) + 1):
            term = np.full(X.shape[0], a[i])
            for l in range(i, i + m):
                term = term * (X[:, l] - mu[l] if l == k else X[:, l])
            out[:, j] += term
    return out


def runs_covariance(spec: RunsSpec) -> np.ndarray:
    """Exact covariance of the run vector by direct summation over overlapping windows."""
    mu = spec.means()
    second = np.array([c.variance() + c.mean() ** 2 for c in spec.components])
    d, n = spec.d, spec.n
    cov = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            mi, mj = spec.m[i], spec.m[j]
            total = 0.0
            for s in range(n):
                ws = set(range(s, s + mi))
                for t in range(max(0, s - mj + 1), min(n, s + mi)):
                    wt = set(range(t, t + mj))
                    both = math.prod(second[l] for l in ws & wt)
                    single = math.prod(mu[l] for l in ws ^ wt)
                    indep = math.prod(mu[l] for l in ws) * math.prod(mu[l] for l in wt)
                    total += spec.a[i][s] * spec.a[j][t] * (both * single - indep)
            cov[i, j] = total
    return 0.5 * (cov + cov.T)


class RunsMomentMaxima(NamedTuple):
    x1: float
    x2: float
    y1: float
    y2: float


def runs_moment_maxima(spec: RunsSpec) -> RunsMomentMaxima:
    """Maxima over inputs of ``E|X|^3``, ``E|X-mu|^3``, ``E|X|^4``, ``E|X-mu|^4``."""
    comps = spec.components
    return RunsMomentMaxima(
        max(c.abs_moment(3) for c in comps),
        max(c.abs_moment(3, central=True) for c in comps),
        max(c.abs_moment(4) for c in comps),
        max(c.abs_moment(4, central=True) for c in comps),
    )


def runs_bound(spec: RunsSpec, g: SmoothnessConstants) -> BoundReport:
    """Closed-form bound for Gaussian targets with the covariance of ``F`` itself."""
    g.require("g2_inf", "g3_inf")
    x1, x2, y1, y2 = runs_moment_maxima(spec)
    d = spec.d
    var_sum = sum(m**3 * math.sqrt(y1 ** (m - 1) * y2 * float(np.sum(a**4))) for m, a in zip(spec.m, spec.a))
    third_sum = sum(m**3 * x1 ** (m - 1) * x2 * float(np.sum(np.abs(a) ** 3)) for m, a in zip(spec.m, spec.a))
    c_var = math.sqrt(2.0) * g.g2_inf * d
    c_third = g.g3_inf * d * d / 3.0
    terms = {"variance_term": c_var * var_sum, "third_moment_term": c_third * third_sum}
    return BoundReport(
        method="runs",
        form="closed",
        alpha=1.0,
        terms=terms,
        constants={"variance_coefficient": c_var, "third_coefficient": c_third, "x1": x1, "x2": x2, "y1": y1, "y2": y2},
        total=float(sum(terms.values())),
    )


def sigma_limit(d: int, p: float) -> np.ndarray:
    """Large-n covariance of the standardized Bernoulli runs ``W_1..W_d``."""
    out = np.zeros((d, d))
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            gap = abs(i - j)
            out[i - 1, j - 1] = p ** (gap / 2) * sum((gap + 1 + 2 * k) * p**k for k in range(min(i, j)))
    return out


def _denominator(n, d, p):
    return p ** (d / 2) * (1.0 - p) ** 1.5 * math.sqrt(n)


def reinert_rollin_bound(n: int, d: int, p: float, g: SmoothnessConstants) -> float:
    """Reinert-Rollin bound for the standardized Bernoulli runs, for comparison."""
    return (416 * d**3.5 * g.g2_inf + 960 * d**5 * g.g3_inf) / _denominator(n, d, p)


def bernoulli_simplified_bound(n: int, d: int, p: float, g: SmoothnessConstants) -> float:
    """Closed-form relaxation of :func:`runs_bound` for standardized Bernoulli runs."""
    return (2 * math.sqrt(2.0) * d**4 * g.g2_inf + 2.0 / 3.0 * d**5 * g.g3_inf) / _denominator(n, d, p)


@dataclass(frozen=True)
class BernoulliRunsComparison:
    n: int
    d: int
    p: float
    sigma_formula: np.ndarray
    exact_sigma: np.ndarray
    sigma_method: str
    sigma_gap: float
    relaxed_bound: float
    reinert_rollin_bound: float
    specialized_bound: BoundReport

    @property
    def runs_within_relaxed(self) -> bool:
        return self.specialized_bound.total <= self.relaxed_bound + 1e-12

    @property
    def relaxed_within_reinert_rollin(self) -> bool:
        return self.relaxed_bound <= self.reinert_rollin_bound


def bernoulli_runs_suite(n: int, d: int, p: float, g: SmoothnessConstants) -> BernoulliRunsComparison:
    """Compare the specialized runs bound with its closed-form relaxation and the earlier bound."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    spec = bernoulli_runs_spec(n, d, p)
    if n + d - 1 <= ENUMERATION_LIMIT:
        table = core.build_joint_table(spec.model, build_runs_statistic(spec))
        exact, method = core.moments(table)[1], "enumeration"
    else:
        exact, method = runs_covariance(spec), "summation"
    formula = sigma_limit(d, p)
    out = BernoulliRunsComparison(
        n=n,
        d=d,
        p=p,
        sigma_formula=formula,
        exact_sigma=exact,
        sigma_method=method,
        sigma_gap=float(np.max(np.abs(formula - exact))),
        relaxed_bound=bernoulli_simplified_bound(n, d, p, g),
        reinert_rollin_bound=reinert_rollin_bound(n, d, p, g),
        specialized_bound=runs_bound(spec, g),
    )
    if not out.runs_within_relaxed:
        raise AssertionError(f"runs bound {out.specialized_bound.total} exceeds its relaxation {out.relaxed_bound}")
    if 2 * math.sqrt(2.0) * d**4 <= 416 * d**3.5 and not out.relaxed_within_reinert_rollin:
        raise AssertionError("relaxed runs bound exceeds the earlier bound")
    return out

