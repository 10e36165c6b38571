"""Rademacher functionals: discrete Malliavin derivative and the d2/d3 bounds."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import core
from .bounds import (
    SQRT_2PI,
    BoundReport,
    GaussianTarget,
    SmoothnessConstants,
    UNIT_CONSTANTS,
    _check_stats,
    _target,
)
from .core import JointTable, ProductModel


def rademacher_model(n: int) -> ProductModel:
    return ProductModel.iid(core.rademacher(), n)


def is_rademacher(model: ProductModel) -> bool:
    for c in model.components:
        if not c.is_finite or c.n_atoms != 2:
            return False
        order = np.argsort(c.values)
        if not np.array_equal(c.values[order], [-1.0, 1.0]):
            return False
        if np.max(np.abs(c.probs - 0.5)) > 1e-15:
            return False
    return True


def _require_rademacher(table: JointTable) -> None:
    if not is_rademacher(table.model):
        raise ValueError("model is not a Rademacher sequence")


def malliavin_derivative(table: JointTable, U, k: int) -> core.RandomVariableTable:
    """``D_k U = (U(x_k=+1) - U(x_k=-1)) / 2``, constant along coordinate ``k``."""
    _require_rademacher(table)
    core._check_coord(table, k)
    U = core._as_rv(table, U)
    vals = table.model.components[k].values
    plus = np.take(U, [int(np.flatnonzero(vals == 1.0)[0])], axis=k)
    minus = np.take(U, [int(np.flatnonzero(vals == -1.0)[0])], axis=k)
    return np.broadcast_to(0.5 * (plus - minus), table.shape).copy()


class TAlpha(NamedTuple):
    mean: np.ndarray
    var: np.ndarray
    tables: np.ndarray


def t_alpha_matrix(table: JointTable, alpha: float = 0.5) -> TAlpha:
    """``T_ij = sum_k D_k F_i (alpha E[D_k F_j | past(k-1)] + (1-alpha) E[D_k F_j | future(k+1)])``."""
    _require_rademacher(table)
    core._check_alpha(alpha)
    d = table.d
    T = np.zeros((d, d) + table.shape)
    for k in range(table.n):
        DF = [malliavin_derivative(table, i, k) for i in range(d)]
        mixed = [
            alpha * core.cond_exp(table, DF[j], k - 1, "past")
            + (1.0 - alpha) * core.cond_exp(table, DF[j], k + 1, "future")
            for j in range(d)
        ]
        for i in range(d):
            for j in range(d):
                T[i, j] += DF[i] * mixed[j]
    axes = tuple(range(2, T.ndim))
    mean = np.sum(T * table.weights, axis=axes)
    var = np.sum((T - mean[(...,) + (None,) * table.n]) ** 2 * table.weights, axis=axes)
    return TAlpha(mean, var, T)


def malliavin_third_moments(table: JointTable) -> np.ndarray:
    """Per component: ``sum_k E|D_k F_i|^3`` with the Malliavin derivative."""
    _require_rademacher(table)
    return np.array(
        [sum(table.expect(np.abs(malliavin_derivative(table, i, k)) ** 3) for k in range(table.n)) for i in range(table.d)]
    )


class RademacherBounds(NamedTuple):
    d3: BoundReport
    d2: BoundReport | None
    d2_reason: str | None


def rademacher_bounds(
    table: JointTable, target, g: SmoothnessConstants = UNIT_CONSTANTS, alpha: float = 0.5
) -> RademacherBounds:
    """The d3 bound (any PSD ``C``) and, for positive definite ``C``, the d2 bound.

    With unit constants these are bounds on the d3 / d2 distances; other
    constants give the bound for that single test function.
    """
    _require_rademacher(table)
    target = _target(target)
    mean, cov = core.moments(table)
    third = malliavin_third_moments(table)
    t = t_alpha_matrix(table, alpha)
    stats = core.ZSummary("exact", alpha, mean, cov, t.mean, t.var, third,
                          t.tables.reshape(table.d, table.d, -1), t.tables.reshape(table.d, table.d, -1),
                          table.weights.ravel())
    _check_stats(stats, target)
    d = table.d
    sq, _ = stats.sq_dev(target.C)
    root = math.sqrt(max(float(np.sum(sq)), 0.0))
    third_sum = float(np.sum(third))

    g.require("g2_inf", "g3_inf")
    c3 = g.g2_inf / 2.0 * d
    c4 = g.g3_inf * d * d / 3.0
    terms = {"covariance_discrepancy": c3 * root, "third_moment_term": c4 * third_sum}
    d3 = BoundReport("rademacher-d3", "L2", alpha, terms, {"first": c3, "second": c4}, float(sum(terms.values())))

    if not target.is_pd:
        return RademacherBounds(d3, None, "C is not positive definite")
    if g.lip is None or g.m2 is None:
        return RademacherBounds(d3, None, "lip and m2 constants not supplied")
    inv, op = target.inv_op_norm, target.op_norm
    b1 = inv * math.sqrt(op) * g.lip
    b2 = SQRT_2PI * inv**1.5 * op * d * d / 4.0 * g.m2
    terms = {"covariance_discrepancy": b1 * root, "third_moment_term": b2 * third_sum}
    d2 = BoundReport("rademacher-d2", "L2", alpha, terms, {"B1": b1, "B2": b2}, float(sum(terms.values())))
    return RademacherBounds(d3, d2, None)
