"""From an elliptic element to a cusp form on gl_2(Q_3).

The characteristic function of a small neighbourhood of an elliptic
element is Fourier transformed.  The transform integrates to zero along
every unipotent direction, which the verifier checks point by point.
"""

from cuspforms.errors import CuspViolation
from cuspforms.gln import companion_elliptic, elliptic_bump, standard_parabolics
from cuspforms.lattice import LatticeWindow, SchwartzFunction, fourier_separable, lie_cusp_verify
from cuspforms.padic import ResiduePolynomial

p, n = 3, 2
C, cert = companion_elliptic(ResiduePolynomial(p, 1, (1, 0, 1)), prec=4)  # x^2 + 1
print("elliptic element", C.entries, "certified:", bool(cert))

bump = elliptic_bump(C, 1)
phi = bump.function
print("bump window", (phi.window.a, phi.window.b), "support", phi.support())

phi_hat = fourier_separable(phi)
print("transform window", (phi_hat.window.a, phi_hat.window.b), "nonzero values:", len(phi_hat.values))
print("inversion gives the reflection:", fourier_separable(phi_hat) == phi.reflect())

rep = lie_cusp_verify(phi_hat, standard_parabolics(n), outside_samples=20, conjugations=20)
print("cusp verification passed:", rep.passed, "points:", rep.points_checked,
      "conjugated parabolics:", rep.conjugated_checked)

# The indicator of M_2(Z_3) is not a cusp form, and the verifier names the point.
try:
    lie_cusp_verify(SchwartzFunction.indicator(LatticeWindow.full(p, n, 0, 1)), standard_parabolics(n))
except CuspViolation as exc:
    print("indicator rejected, witness X =", exc.witness["X"]["entries"], "value", exc.witness["value"])
