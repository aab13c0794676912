"""Four ways to differentiate f(eta) = eta(x)^2 at eta = delta_0 + delta_1.

Every estimate is a one-sided limit evaluated on a halving ladder of step
sizes and Richardson-extrapolated; the ladder is printed next to the value.
"""

import numpy as np

from measure_calculus import (
    FDConfig,
    Manifold,
    builtin,
    centered_extrinsic_fd,
    extrinsic_fd,
    fields,
    intrinsic_directional,
    l_directional,
    make_measure,
)

R = Manifold.euclidean(1)
f = builtin("first_moment_squared")
eta = make_measure(R, [(1, [0.0]), (1, [1.0])])
cfg = FDConfig()


def show(label, est):
    print(f"{label:34s} {est.value: .12f}  converged={est.converged}")
    print(" " * 34, "ladder", np.array2string(np.asarray(est.ladder), precision=6))


# adding mass at x = 2: (1 + 2s)^2 grows at rate 2 * 1 * 2
show("extrinsic at x=2", extrinsic_fd(f, eta, [2.0], cfg))

# mixing a probability measure with delta_2
show("centered at x=2 (mu = eta/2)", centered_extrinsic_fd(f, eta.scaled(0.5), [2.0], cfg))

# moving atoms by the flow of v(x) = x, cut off far away so the flow is complete
v = fields.linear_field([[1.0]], cutoff=fields.radial_cutoff(3.0, 4.0))
show("intrinsic along v(x) = x", intrinsic_directional(f, eta, v, cfg))
show("L-derivative along v(x) = x", l_directional(f, eta, v, cfg))
