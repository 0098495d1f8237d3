"""Why the stepsize must adapt: any fixed stepsize can be made unstable.

For a given constant alpha, rescaling the right-hand side by
t = 3 / (alpha * lambda_max(diag(x*) A^T A)) puts the update Jacobian's
spectral radius at exactly 2 on the scaled problem, so iterates started
arbitrarily close to the solution are expelled.  The adaptive stepsize
solves the identical instance without trouble.
"""

import numpy as np

from entmd import (
    Method,
    SolveConfig,
    instability_construction,
    instability_escape_distance,
    seeded_rng,
    solve,
)
from entmd import ProblemInstance

rng = seeded_rng(5)
m, n = 8, 5
a = rng.standard_normal((m, n))
z = rng.uniform(0.2, 1.2, n)
p = ProblemInstance(a, a @ z, planted=z)

for alpha in (0.5, 2.0):
    inst = instability_construction(p, alpha)
    escape = instability_escape_distance(inst, iters=10_000)
    target = float(np.linalg.norm(inst.scaled.planted))
    print(f"alpha={alpha:4.1f}: scale t={inst.t_scale:9.4f}, "
          f"Jacobian spectral radius={inst.jacobian_spectrum_bound:.12f}")
    print(f"  constant-stepsize run from (1 + 1e-6) * solution wanders to "
          f"distance {escape:.4f} ({escape / target:.1%} of ||solution||)")

    x0 = (1.0 + 1e-6) * inst.scaled.planted
    res = solve(inst.scaled, SolveConfig(Method.md_polyak(), x0, f_tol=1e-16))
    print(f"  adaptive run on the same instance: {res.status.value} "
          f"after {res.iters_run} iterations\n")
