"""Quadratic forms: the four-term bound along two families.

The tridiagonal family spreads its mass evenly, so every condition vanishes
and the bound decays like n^(-1/2).  The star family puts a whole row on one
input, the row condition stays at one, and the sweep flags it.
"""

import numpy as np

from mvclt import core, quadforms
from mvclt.bounds import UNIT_CONSTANTS

A = np.array([[0.0, 1.0], [1.0, 0.0]])
spec = quadforms.QuadFormSpec((A,), (core.rademacher(),) * 2)
rep = quadforms.qf_bound(spec, np.eye(1), UNIT_CONSTANTS)
print(f"F = X0*X1: total {rep.total:.5f}")
for name, value in rep.terms.items():
    print(f"  {name:<20} {value:.5f}")

grid = [16, 32, 64, 128, 256, 512, 1024]
for label, matrix in (("tridiagonal", quadforms.tridiagonal_matrix), ("star", quadforms.star_matrix)):
    sweep = quadforms.qf_clt_sweep(quadforms.rademacher_family(matrix), np.eye(1), UNIT_CONSTANTS, grid)
    print(f"\n{label}: slope {sweep.slope:.4f}, conditions vanish: {sweep.conditions_vanish}")
    for row in sweep.rows[::2]:
        c = row.conditions
        print(f"  n={row.n:<5} total {row.total:9.5f}  max row {c.max_row_condition[0]:.4f}  trace {c.trace_condition[0, 0]:.4f}")
