"""A functional with an L-derivative but no extrinsic derivative.

f(eta) = psi(eta(M)) with psi(t) = (t - 2) sin(ln|t - 2|).  Moving atoms never
changes total mass, so every L-directional derivative is 0.  Adding mass at
eta(M) = 2 probes psi near its wild point, and the difference quotient keeps
oscillating as the step shrinks.
"""

import numpy as np

from measure_calculus import FDConfig, Manifold, builtin, extrinsic_fd, fields, l_directional, make_measure

R = Manifold.euclidean(1)
f = builtin("oscillator_mass")
eta = make_measure(R, [(1, [0.0]), (1, [1.0])])

ext = extrinsic_fd(f, eta, [5.0], FDConfig(levels=12))
print("extrinsic quotients:", np.round(ext.ladder, 3))
print("converged:", ext.converged, " spread:", round(ext.spread, 3))

v = fields.linear_field([[1.0]], cutoff=fields.radial_cutoff(2.0, 3.0))
ld = l_directional(f, eta, v)
print("L-directional derivative:", ld.value, " converged:", ld.converged)
