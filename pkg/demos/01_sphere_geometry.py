"""Walking on the unit sphere: geodesics, logarithms and parallel transport."""

import numpy as np

from measure_calculus import Manifold

S = Manifold.sphere(3)
north = np.array([0.0, 0.0, 1.0])
east = np.array([1.0, 0.0, 0.0])

# quarter of a great circle from the north pole toward the equator
y = S.exp(north, np.pi / 2 * east)
print("exp_N(pi/2 e1)        =", np.round(y, 15))
print("distance              =", S.distance(north, y))
print("log_N(e1)             =", S.log(north, east))

# transported e1 points straight down once it reaches the equator
v = S.transport(north, east, east)
print("transport e1 N -> e1  =", v, " |v| =", np.linalg.norm(v))

# gradients use the analytic hook when a field has one, otherwise differences along exp
height = lambda x: x[2]
print("grad x3 at e1         =", np.round(S.gradient(height, east), 8))

# near-antipodal pairs are refused rather than silently wrong
try:
    S.log(north, -north)
except ValueError as err:
    print("log at the antipode   ->", type(err).__name__, err)
