"""Exact values of additive characters.

Values of psi live in Z[1/p][zeta_{p^m}].  Elements are kept in a
canonical form, so equality is structural and zero really means zero.
"""

from cuspforms.cyclotomic import Cyclotomic, additive_character
from cuspforms.padic import ScaledResidue

p = 3
z = Cyclotomic.zeta(p, 1)
print("1 + zeta_3 + zeta_3^2 is zero:", (Cyclotomic.integer(p, 1) + z + z * z).is_zero())

# psi(x) = exp(2 pi i {x}_p); x = 1/9 gives a primitive 9th root of unity.
x = ScaledResidue(p, -2, 1, 2)
print("psi(1/9) =", additive_character(x, 2), "~", additive_character(x, 2).to_complex())

# A character sum over Z/9 collapses exactly.
total = Cyclotomic.zero(p)
for a in range(9):
    total = total + additive_character(ScaledResidue(p, -2, a, 2), 2)
print("sum over a mod 9 of psi(a/9):", total)

# Galois conjugation permutes the roots of unity.
print("sigma_2(zeta_9) == zeta_9^2:", Cyclotomic.zeta(p, 2).galois(2) == Cyclotomic.zeta(p, 2, 2))
