"""Generic Stein and Slepian bounds against a cosine test function.

For the normalized sum of n Rademacher signs the covariance discrepancy is
zero, so both bounds reduce to their third-moment terms and decay like
n^(-1/2).  The observed gap |E g(F) - E g(Y)| sits well below both.
"""

import numpy as np

from mvclt import core, verify
from mvclt.bounds import slepian_bound, stein_bound

g = verify.make_cosine_family([1.0])
print(f"test function {g.name}, constants {g.constants}")
print(f"{'n':>3} {'lhs':>12} {'slepian L1':>12} {'slepian split':>14} {'stein L2':>12}")
for n in (1, 2, 4, 8, 12):
    table = core.build_joint_table(core.ProductModel.iid(core.rademacher(), n), core.normalized_sum(n))
    stats = core.exact_summary(table, 0.5)
    lhs = verify.discrepancy(table.model, table.statistic, g, np.eye(1), table=table).lhs
    sl = slepian_bound(stats, np.eye(1), g.constants, "L1").total
    sp = slepian_bound(stats, np.eye(1), g.constants, "split").total
    st = stein_bound(stats, np.eye(1), g.constants, "L2").total
    print(f"{n:>3} {lhs:12.3e} {sl:12.6f} {sp:14.6f} {st:12.6f}")

# A singular target is fine for Slepian but refused by Stein.
table = core.build_joint_table(
    core.ProductModel.iid(core.rademacher(), 2), core.polynomial_statistic([[(1.0, (0, 1))], [(1.0, (0, 1))]], 2)
)
stats = core.exact_summary(table, 0.5)
print("\nrepeated component, C =", stats.sigma.tolist())
print("slepian total:", slepian_bound(stats, stats.sigma, verify.default_test_functions(2)[0].constants).total)
try:
    stein_bound(stats, stats.sigma, verify.default_test_functions(2)[0].constants)
except ValueError as exc:
    print("stein refused:", exc)
