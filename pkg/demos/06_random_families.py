"""Differentiating f along the laws of a moving random point.

xi_s takes finitely many values; d/ds f(law(xi_s)) at 0 should match
E < grad of the centered extrinsic derivative at xi_0, d/ds xi_s >.
"""

import numpy as np

from measure_calculus import Manifold, RandomFamily, builtin, check_distribution_derivative

# uniform on {0, 1}, scaled by (1 + s): d/ds (E xi_s)^2 = 2 * 1/2 * 1/2
R = Manifold.euclidean(1)
x0 = np.array([[0.0], [1.0]])
fam = RandomFamily(R, [0.5, 0.5], lambda s, i: x0[i] * (1.0 + s), x0, name="uniform*(1+s)")
r = check_distribution_derivative(builtin("first_moment_squared"), fam)
print(r, f"  lhs={r.lhs:.10f} rhs={r.rhs:.10f}")

# a point climbing a meridian from the equator: its height grows at unit speed
S = Manifold.sphere(3)
e1, e3 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
fam = RandomFamily(S, [1.0], lambda s, i: S.exp(e1, s * e3), [e3], name="meridian")
r = check_distribution_derivative(builtin("sphere_height"), fam)
print(r, f"  lhs={r.lhs:.10f} rhs={r.rhs:.10f}")
print("W_2 distance of law(xi_s) to law(xi_0) along the ladder:",
      np.round(r.diagnostic["wasserstein_to_law0"], 6))
