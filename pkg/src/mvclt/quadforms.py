"""Vectors of quadratic forms ``F_i = sum_{u<v} A_i[u, v] X_u X_v``.

Inputs are independent with zero mean and unit variance, and each ``A_i`` is
symmetric with a vanishing diagonal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import BoundReport, GaussianTarget, SmoothnessConstants, _target
from .core import ComponentDistribution, ProductModel, StatisticVector

MOMENT_TOL = 1e-12
SYM_TOL = 1e-12


def _symmetrize(A: np.ndarray, index: int) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"coefficient matrix {index} must be square, got shape {A.shape}")
    if np.max(np.abs(np.diag(A)), initial=0.0) > SYM_TOL:
        raise ValueError(f"coefficient matrix {index} has a non-zero diagonal")
    if np.max(np.abs(A - A.T), initial=0.0) > SYM_TOL:
        lower = np.tril(A, -1)
        if np.any(lower != 0.0):
            warnings.warn(
                f"coefficient matrix {index} is not symmetric; using its upper triangle", stacklevel=3
            )
        upper = np.triu(A, 1)
        A = upper + upper.T
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class QuadFormSpec:
    A: tuple[np.ndarray, ...]
    components: tuple[ComponentDistribution, ...]
    max_var_sq: float | None = None
    max_fourth: float | None = None

    def __post_init__(self):
        mats = tuple(_symmetrize(a, i) for i, a in enumerate(self.A))
        if not mats:
            raise ValueError("need at least one coefficient matrix")
        n = mats[0].shape[0]
        if any(a.shape != (n, n) for a in mats):
            raise ValueError("coefficient matrices must share one size")
        comps = tuple(self.components)
        if len(comps) != n:
            raise ValueError(f"need {n} input laws, got {len(comps)}")
        for k, c in enumerate(comps):
            if abs(c.mean()) > MOMENT_TOL or abs(c.variance() - 1.0) > MOMENT_TOL:
                raise ValueError(f"input {k} must have zero mean and unit variance")
        var_sq = self.max_var_sq
        fourth = self.max_fourth
        if var_sq is None:
            var_sq = max(c.var_of_square() for c in comps)
        if fourth is None:
            fourth = max(c.abs_moment(4) for c in comps)
        object.__setattr__(self, "A", mats)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "max_var_sq", float(var_sq))
        object.__setattr__(self, "max_fourth", float(fourth))

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return self.A[0].shape[0]

    @property
    def model(self) -> ProductModel:
        return ProductModel(self.components)


def build_quadratic_form(spec: QuadFormSpec) -> StatisticVector:
    stack = np.stack(spec.A)  # (d, n, n)

    def func(X):
        return 0.5 * np.einsum("iuv,bu,bv->bi", stack, X, X)

    def closed_diff(k, X, value):
        # F_i is affine in X_k with slope sum_v A_i[k, v] X_v
        slope = X @ stack[:, k, :].T
        return slope * (np.asarray(value, dtype=float) - X[:, k])[:, None]

    return StatisticVector(func, spec.d, closed_diff=closed_diff, name="quadform")


def qf_difference(spec: QuadFormSpec, X: np.ndarray, k: int) -> np.ndarray:
    """``D_k F_i = X_k sum_v A_i[k, v] X_v``."""
    X = np.atleast_2d(X)
    return X[:, [k]] * (X @ np.stack(spec.A)[:, k, :].T)


@dataclass(frozen=True)
class QFConditions:
    pairwise_covariance: np.ndarray
    trace_condition: np.ndarray
    trace_condition_check: np.ndarray
    max_row_condition: np.ndarray
    dejong_tr_a4: np.ndarray
    dejong_ratio: np.ndarray
    dejong_row_ratio: np.ndarray

    @property
    def trace_discrepancy(self) -> float:
        return float(np.max(np.abs(self.trace_condition - self.trace_condition_check)))


def qf_conditions(spec: QuadFormSpec) -> QFConditions:
    """Covariance, mixed-trace and row conditions, plus de Jong's quantities."""
    A = spec.A
    d = spec.d
    cov = np.zeros((d, d))
    trace = np.zeros((d, d))
    check = np.zeros((d, d))
    iu = np.triu_indices(spec.n, 1)
    for i in range(d):
        for j in range(d):
            cov[i, j] = float(A[i][iu] @ A[j][iu])
            inner = np.einsum("ku,kv->uv", A[i], A[j])
            trace[i, j] = float(np.sum(inner**2))
            check[i, j] = float(np.trace(A[i] @ A[i] @ A[j] @ A[j]))
    rows = np.array([np.max(np.sum(a**2, axis=1)) for a in A])
    tr4 = np.array([np.trace(np.linalg.matrix_power(a, 4)) for a in A])
    var = np.diag(cov)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(var > 0, tr4 / var**2, np.nan)
        row_ratio = np.where(var > 0, rows / var, np.nan)
    return QFConditions(cov, trace, check, rows, tr4, ratio, row_ratio)


def qf_bound(spec: QuadFormSpec, target, g: SmoothnessConstants) -> BoundReport:
    """Four-term bound for the quadratic-form vector against ``N(0, C)``."""
    g.require("g2_inf", "g3_inf")
    target = _target(target)
    if target.d != spec.d:
        raise ValueError(f"target dimension {target.d} does not match {spec.d} forms")
    cond = qf_conditions(spec)
    d = spec.d
    vsq, m4 = spec.max_var_sq, spec.max_fourth
    row_energy = np.stack([np.sum(a**2, axis=1) for a in spec.A])  # (d, n)
    g2, g3 = g.g2_inf, g.g3_inf
    c = g2 / 2 ** 1.5

    t_cov = g2 / 2 * float(np.sum(np.abs(target.C - cond.pairwise_covariance)))
    t_star = c * sum(math.sqrt(max(2.0, vsq) * cond.trace_condition[i, j]) for i in range(d) for j in range(d))
    t_ast = c * sum(
        math.sqrt(8.0 * vsq * m4 * float(row_energy[i] @ row_energy[j])) for i in range(d) for j in range(d)
    )
    t_third = 2 ** 1.5 * m4 * g3 * d * d / 3.0 * float(np.sum(row_energy**1.5))
    terms = {
        "covariance_mismatch": t_cov,
        "Z_star_variance": t_star,
        "Z_ast_variance": t_ast,
        "third_moment": t_third,
    }
    return BoundReport(
        method="quadform",
        form="closed",
        alpha=0.5,
        terms=terms,
        constants={"max_var_sq": vsq, "max_fourth_moment": m4, "g2_inf": g2, "g3_inf": g3},
        total=float(sum(terms.values())),
    )


def z_decomposition(spec: QuadFormSpec, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample ``(Z_ast, Z_star)``, each of shape ``(N, d, d)``.

    ``Z_ast_ij = sum_k (X_k^2 - 1) r_ik r_jk`` and ``Z_star_ij = sum_k r_ik r_jk``
    with ``r_ik = sum_v A_i[k, v] X_v``.
    """
    X = np.atleast_2d(X)
    r = np.einsum("ikv,bv->bik", np.stack(spec.A), X)
    z_ast = np.einsum("bk,bik,bjk->bij", X**2 - 1.0, r, r)
    z_star = np.einsum("bik,bjk->bij", r, r)
    return z_ast, z_star


# --------------------------------------------------------------------------
# Families and sweeps
# --------------------------------------------------------------------------


def tridiagonal_matrix(n: int) -> np.ndarray:
    """``A[u, u+1] = 1/sqrt(n-1)`` so the form has unit variance."""
    c = 1.0 / math.sqrt(n - 1)
    return c * (np.eye(n, k=1) + np.eye(n, k=-1))


def star_matrix(n: int) -> np.ndarray:
    """All mass on the first row: ``A[0, v] = 1/sqrt(n-1)``."""
    A = np.zeros((n, n))
    A[0, 1:] = A[1:, 0] = 1.0 / math.sqrt(n - 1)
    return A


def rademacher_family(matrix: Callable[[int], np.ndarray], copies: int = 1) -> Callable[[int], QuadFormSpec]:
    from .core import rademacher

    def family(n):
        A = matrix(n)
        return QuadFormSpec(tuple([A] * copies), (rademacher(),) * n)

    return family


@dataclass(frozen=True)
class SweepRow:
    n: int
    terms: dict
    total: float
    conditions: QFConditions


@dataclass(frozen=True)
class SweepResult:
    rows: list
    slope: float | None
    conditions_vanish: bool

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total for r in self.rows])


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float | None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def qf_clt_sweep(
    family: Callable[[int], QuadFormSpec],
    C,
    g: SmoothnessConstants,
    n_grid: Sequence[int],
    vanish_slope: float = -0.1,
) -> SweepResult:
    """Evaluate the bound along ``n_grid``.

    The three conditions are judged to vanish when every condition value is
    either zero or has a fitted log-log slope below ``vanish_slope``; the
    covariance condition is judged by ``|C - cov|``.
    """
    target = _target(C) if not isinstance(C, GaussianTarget) else C
    rows = []
    for n in n_grid:
        spec = family(n)
        rep = qf_bound(spec, target, g)
        rows.append(SweepRow(n, rep.terms, rep.total, qf_conditions(spec)))
    ns = [r.n for r in rows]
    series = [np.array([np.max(np.abs(target.C - r.conditions.pairwise_covariance)) for r in rows])]
    series.append(np.array([np.max(r.conditions.trace_condition) for r in rows]))
    series.append(np.array([np.max(r.conditions.max_row_condition) for r in rows]))
    vanish = True
    for s in series:
        if np.all(s <= 1e-12):
            continue
        slope = loglog_slope(ns, s)
        if slope is None or slope > vanish_slope or s[-1] > 1e-12 and len(s) < 2:
            vanish = False
    return SweepResult(rows, loglog_slope(ns, [r.total for r in rows]), vanish)
