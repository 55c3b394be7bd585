"""Moving the cusp form to GL_2(Q_3).

After scaling by lambda with val(lambda) at the threshold, the function
lives deep enough near 0 that exp carries it to a function on a
congruence subgroup, and the unipotent integrals on the group equal the
ones on the Lie algebra.
"""

from cuspforms.gln import companion_elliptic, default_torus_poly, elliptic_bump, standard_parabolics
from cuspforms.group import (
    charts_agree,
    group_cusp_verify,
    jacquet_vanishing_check,
    lambda_threshold,
    lift_to_group,
    window_constants,
)
from cuspforms.lattice import fourier_separable, scale_function
from cuspforms.padic import ScaledResidue

p, n = 3, 2
C, _ = companion_elliptic(default_torus_poly(p, n), prec=8)
phi_hat = fourier_separable(elliptic_bump(C, 1).function)

n0, n1 = window_constants(phi_hat.window)
v = lambda_threshold(n0, n1)
print(f"n0={n0} n1={n1}: scaling by p^{v}")
phi_lam = scale_function(phi_hat, ScaledResidue(p, v, 1, 8))
print("phi_lambda window", (phi_lam.window.a, phi_lam.window.b))

f = lift_to_group(phi_lam, "exp")
h = lift_to_group(phi_lam, "id-plus-x")
print(f"group function on K_{f.n_level}/K_{f.m_level}: {len(f.values)} nonzero cosets")

rep = group_cusp_verify(f, standard_parabolics(n), phi_lam, outside_samples=10)
print("group cusp integrals vanish:", rep.passed, "group = Lie checks:", rep.reduction_checks)
print("exp and 1+X charts agree on", charts_agree(f, h), "cosets")

for P in standard_parabolics(n):
    res = jacquet_vanishing_check(f, P)
    print(f"Jacquet check along {P.label}: k={res.k}, passed={res.passed}")
