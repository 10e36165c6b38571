"""Exact checks of the difference-operator identities on a joint table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import core

ALPHAS = (0.0, 0.25, 0.5, 1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_violation <= self.tolerance)


def _worst(values: Iterable[float]) -> float:
    values = list(values)
    return float(max(values)) if values else 0.0


def identity_checks(
    table: core.JointTable,
    alphas: Sequence[float] = ALPHAS,
    test_functions: Sequence = (),
) -> list[CheckResult]:
    """Run every identity/inequality check; violations are signed (<= 0 is slack).

    The operators are looked up on :mod:`mvclt.core` at call time so a broken
    implementation patched in there is caught.
    """
    D, dd, E = core.diff_D, core.diff_d, table.expect
    n, dim = table.n, table.d
    comps = [table.component(i) for i in range(dim)]
    results = []

    results.append(CheckResult("weights_normalized", abs(table.weights.sum() - 1.0), 1e-12))

    DU = [[D(table, U, k) for k in range(n)] for U in comps]
    dU = [[dd(table, U, k) for k in range(n)] for U in comps]

    results.append(CheckResult("d_nonnegative", _worst(-np.min(x) for row in dU for x in row), 0.0))

    # (d_k U)^2 = 1/2 [(D_k U)^2 + E_k (D_k U)^2]
    viol = []
    for i in range(dim):
        for k in range(n):
            rhs = 0.5 * (DU[i][k] ** 2 + core.expect_k(table, DU[i][k] ** 2, k))
            viol.append(np.max(np.abs(dU[i][k] ** 2 - rhs)))
    results.append(CheckResult("d_squared_decomposition", _worst(viol), 1e-10))

    # Efron-Stein, and equality of the two energy sums
    es, es_eq, add_eq = [], [], []
    for i, U in enumerate(comps):
        var = E(U**2) - E(U) ** 2
        sum_D = sum(E(x**2) for x in DU[i])
        sum_d = sum(E(x**2) for x in dU[i])
        es.append(var - sum_D)
        es_eq.append(abs(sum_D - sum_d))
        # first-order projection is additive, so Efron-Stein is an equality for it
        proj = sum(core.marginal_cond_exp(table, U, k) for k in range(n)) - (n - 1) * E(U)
        var_p = E(proj**2) - E(proj) ** 2
        add_eq.append(abs(var_p - sum(E(D(table, proj, k) ** 2) for k in range(n))))
    results.append(CheckResult("efron_stein", _worst(es), 1e-12))
    results.append(CheckResult("efron_stein_D_equals_d", _worst(es_eq), 1e-10))
    results.append(CheckResult("efron_stein_additive_equality", _worst(add_eq), 1e-9))

    # D_k E[U|past(k)] = E[U|past(k)] - E[U|past(k-1)] = E[D_k U|past(k)], and the future analogue
    past, fut = [], []
    for U in comps:
        for k in range(n):
            cp = core.cond_exp(table, U, k, "past")
            inc = cp - core.cond_exp(table, U, k - 1, "past")
            past.append(np.max(np.abs(D(table, cp, k) - inc)))
            past.append(np.max(np.abs(core.cond_exp(table, D(table, U, k), k, "past") - inc)))
            cf = core.cond_exp(table, U, k, "future")
            inc = cf - core.cond_exp(table, U, k + 1, "future")
            fut.append(np.max(np.abs(D(table, cf, k) - inc)))
            fut.append(np.max(np.abs(core.cond_exp(table, D(table, U, k), k, "future") - inc)))
    results.append(CheckResult("commutation_past", _worst(past), 1e-10))
    results.append(CheckResult("commutation_future", _worst(fut), 1e-10))

    # E[(D U) V] = E[(D V) U] = E[(D U)(D V)]
    sym = []
    for i in range(dim):
        for j in range(dim):
            for k in range(n):
                a = E(DU[i][k] * comps[j])
                b = E(DU[j][k] * comps[i])
                c = E(DU[i][k] * DU[j][k])
                sym.append(max(abs(a - c), abs(b - c)))
    results.append(CheckResult("integration_by_parts", _worst(sym), 1e-10))

    # E|D U|^2 <= E U^2 and E (d U)^4 <= E (D U)^4
    l2, l4 = [], []
    for i, U in enumerate(comps):
        for k in range(n):
            l2.append(E(DU[i][k] ** 2) - E(U**2))
            l4.append(E(dU[i][k] ** 4) - E(DU[i][k] ** 4))
    results.append(CheckResult("moment_contraction_2", _worst(l2), 1e-12))
    results.append(CheckResult("moment_contraction_4", _worst(l4), 1e-12))

    # covariance formula, alpha invariance, and E[Z] = sigma
    _, cov = core.moments(table)
    cf, inv, zs, zv = [], [], [], []
    for i in range(dim):
        for j in range(dim):
            sums = []
            for alpha in alphas:
                s = sum(E(DU[i][k] * core.d_alpha(table, comps[j], k, alpha)) for k in range(n))
                sums.append(s)
                cf.append(abs(cov[i, j] - s))
            inv.append(max(sums) - min(sums))
    for alpha in alphas:
        z = core.z_alpha_moments(table, alpha)
        zs.append(np.max(np.abs(z.mean - cov)))
        zv.append(-np.min(z.var))
    results.append(CheckResult("covariance_formula", _worst(cf), 1e-9))
    results.append(CheckResult("alpha_invariance", _worst(inv), 1e-9))
    results.append(CheckResult("z_mean_equals_sigma", _worst(zs), 1e-9))
    results.append(CheckResult("z_variance_nonnegative", _worst(zv), 1e-12))

    if test_functions:
        viol = [core.chain_rule_residual_check(table, f, k) for f in test_functions for k in range(n)]
        results.append(CheckResult("chain_rule_remainder", _worst(viol), 1e-9))
    return results
