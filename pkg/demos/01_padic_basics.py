"""Fixed-precision p-adic matrices: valuations, exp/log, characteristic polynomials.

Every quantity here is exact modulo a stated power of p.  When the answer
is not determined by the data the library says so (``AtLeast``) rather
than guessing.
"""

from cuspforms.padic import (
    AtLeast,
    ResiduePolynomial,
    ScaledMatrix,
    charpoly_division_free,
    exp_truncated,
    irreducible_over_residue_field,
    lattice_valuation,
    log_truncated,
)

p = 3

# A matrix in 3*M_2(Z_3), known modulo 3^5.
X = ScaledMatrix.from_integers(p, [[3, 9], [6, 27]], prec=5)
print("X =", X.entries, " lattice valuation:", lattice_valuation(X))

# Zero modulo p^4 only tells us the valuation is at least 4.
Z = ScaledMatrix.zero(p, 2, 0, 4)
v = lattice_valuation(Z)
print("zero mod 3^4 has valuation", v, "(an AtLeast bound)" if isinstance(v, AtLeast) else "")

# exp and log are mutually inverse on p*M_n(Z_p) for odd p.
g = exp_truncated(X)
print("exp(X) =", g.entries, "mod 3^%d" % g.abs_prec)
back = log_truncated(g)
print("log(exp(X)) == X:", back.with_abs_prec(back.abs_prec) == X.with_abs_prec(back.abs_prec))

# Characteristic polynomials without division, then an irreducibility test mod p.
C = ScaledMatrix.from_integers(p, [[0, -1], [1, 0]], prec=3)
chi = charpoly_division_free(C)
print("charpoly of [[0,-1],[1,0]]:", chi.coeffs, "(low degree first)")
print("irreducible mod 3:", irreducible_over_residue_field(chi.mod_p()))
print("x^2 - 1 irreducible mod 3:", irreducible_over_residue_field(ResiduePolynomial(p, 1, (2, 0, 1))))
