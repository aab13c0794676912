"""The integral identities, one instance each.

Both sides are computed independently and compared; the printed report line
shows the residual against its tolerance.
"""

from measure_calculus import (
    Manifold,
    builtin,
    check_centered,
    check_dirac_gradient,
    check_dirac_limit,
    check_lfd_identity,
    check_reweight_identity,
    fields,
    linear_perturbation,
    make_measure,
)

R = Manifold.euclidean(1)
f = builtin("first_moment_squared")
eta = make_measure(R, [(1, [0.0]), (1, [1.0])])

r = check_lfd_identity(f, eta, make_measure(R, [(2, [2.0])]))
print(r, f"  lhs={r.lhs:g} rhs={r.rhs:.12f}")

pert = linear_perturbation(fields.smooth_bump([0.0], 1.0), eps0=0.25)
print(check_reweight_identity(f, eta, pert, 0.25))

for s in (1.0, 0.5, 0.1):
    print(check_dirac_gradient(f, eta, s, [2.0]))
print(check_dirac_limit(f, eta, [2.0]))

mu = make_measure(R, [(0.5, [0.0]), (0.5, [1.0])])
r = check_centered(f, mu, [2.0])
print(r, f"  centered={r.lhs:.12f} = 2 - 0.5")
