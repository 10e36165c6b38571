"""Rademacher functionals: the Malliavin derivative and the d2/d3 bounds.

On a sign sequence the difference operator factors as X_k times the
two-point derivative, and the Z matrix can be computed from derivatives
alone.  The d3 bound is compared with a lower estimate of the distance
taken over a small cosine family.
"""

import numpy as np

from mvclt import core, rademacher, verify

n = 5
F = core.polynomial_statistic([[(1.0, (0, 1)), (1.0, (1, 2)), (1.0, (2, 3)), (1.0, (3, 4))]], n)
table = core.build_joint_table(rademacher.rademacher_model(n), F)
_, cov = core.moments(table)
print(f"chain of four products, variance {cov[0, 0]:.3f}")

worst = max(
    float(np.max(np.abs(core.diff_D(table, 0, k) - table.coordinate(k) * rademacher.malliavin_derivative(table, 0, k))))
    for k in range(n)
)
print(f"max |D_k F - X_k * Malliavin_k F| = {worst:.1e}")

T = rademacher.t_alpha_matrix(table, 0.5)
Z = core.z_alpha_moments(table, 0.5)
print(f"max |T - Z| = {np.max(np.abs(T.tables - Z.tables)):.1e}, E[T] = {T.mean[0, 0]:.6f}, Var[T] = {T.var[0, 0]:.6f}")

rb = rademacher.rademacher_bounds(table, cov)
print(f"d3 bound {rb.d3.total:.4f}  terms {rb.d3.terms}")
print(f"d2 bound {rb.d2.total:.4f}")

family = [verify.make_cosine_family([s], ph) for s in np.linspace(0.25, 2.0, 8) for ph in (0.0, np.pi / 4, np.pi / 2)]
lower = verify.distance_lower_bound(table, cov, family, order=3)
print(f"d3 lower estimate from {len(family)} cosines: {lower:.4f} <= {rb.d3.total:.4f}")
