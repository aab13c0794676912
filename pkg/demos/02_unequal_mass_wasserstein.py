"""A Wasserstein-type distance between measures of different total mass.

The distance adds two parts: the gap in ``eta(1 + rho_o^p)`` and the cost of
an optimal coupling whose marginals are each measure rescaled by the other's
mass.
"""

import numpy as np

from measure_calculus import Manifold, dirac, make_measure, optimal_coupling, wasserstein_p

R = Manifold.euclidean(1)
d0, d1 = dirac(R, [0.0]), dirac(R, [1.0])
print("W_1(delta_0, delta_1)             =", wasserstein_p(d0, d1, 1.0))

half = make_measure(R, [(0.5, [0.0]), (0.5, [2.0])])
print("W_2(delta_0/2 + delta_2/2, delta_1) =", wasserstein_p(half, d1, 2.0))

# different masses: the plan's rows sum to eta(M) gamma, its columns to gamma(M) eta
gamma = make_measure(R, [(1.0, [0.0]), (1.0, [1.0])])
eta = make_measure(R, [(3.0, [0.5])])
plan = optimal_coupling(gamma, eta, 2.0)
print("plan:\n", plan.plan)
print("row sums", plan.plan.sum(axis=1), "column sums", plan.plan.sum(axis=0))
print("W_2(gamma, eta)                   =", wasserstein_p(gamma, eta, 2.0))

# on the sphere the ground distance is the great-circle angle
S = Manifold.sphere(3)
a = dirac(S, [0.0, 0.0, 1.0])
b = dirac(S, [1.0, 0.0, 0.0])
print("W_1 on the sphere, pole vs equator  =", wasserstein_p(a, b, 1.0), "(pi/2 + pi/2 =", np.pi, ")")
