"""Parabolic structure of GL_n and certified elliptic regular elements.

Standard parabolics are indexed by compositions of n; ``P`` is the block
upper-triangular subgroup, ``N`` its strictly block-upper part.  An element
of gl_n(Z_p) whose characteristic polynomial is irreducible modulo p is
regular elliptic: its characteristic polynomial is then irreducible over
Q_p, so it stabilizes no proper subspace of Q_p^n and lies in no proper
parabolic subalgebra.  The same stays true on the whole coset X + p*M_n(Z_p)
because the characteristic polynomial modulo p only sees X modulo p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeWindow, SchwartzFunction, full_coords
from .padic import (
    AtLeast,
    ResiduePolynomial,
    ScaledMatrix,
    ScaledResidue,
    charpoly_division_free,
    det_mod,
    irreducible_over_residue_field,
    lattice_valuation,
    mat_inv_mod,
    mat_mul,
)
from .errors import PrecisionError

Coord = tuple[int, int]


def compositions(n: int) -> list[tuple[int, ...]]:
    """All compositions of n in lexicographic order."""
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        out.extend((first,) + rest for rest in compositions(n - first))
    return out


@dataclass(frozen=True)
class ParabolicData:
    composition: tuple[int, ...]
    levi_coords: tuple[Coord, ...] = field(init=False)
    parabolic_coords: tuple[Coord, ...] = field(init=False)
    nilradical_coords: tuple[Coord, ...] = field(init=False)
    opposite_nilradical_coords: tuple[Coord, ...] = field(init=False)

    def __post_init__(self):
        comp = tuple(int(c) for c in self.composition)
        if not comp or any(c <= 0 for c in comp):
            raise ValueError("composition must consist of positive integers")
        object.__setattr__(self, "composition", comp)
        blocks = [b for b, size in enumerate(comp) for _ in range(size)]
        n = len(blocks)
        coords = full_coords(n)
        object.__setattr__(self, "levi_coords", tuple(c for c in coords if blocks[c[0]] == blocks[c[1]]))
        object.__setattr__(self, "nilradical_coords", tuple(c for c in coords if blocks[c[0]] < blocks[c[1]]))
        object.__setattr__(self, "opposite_nilradical_coords", tuple(c for c in coords if blocks[c[0]] > blocks[c[1]]))
        object.__setattr__(self, "parabolic_coords", tuple(c for c in coords if blocks[c[0]] <= blocks[c[1]]))

    @property
    def n(self) -> int:
        return sum(self.composition)

    @property
    def is_proper(self) -> bool:
        return len(self.composition) > 1

    @property
    def label(self) -> str:
        return "-".join(map(str, self.composition))

    def contains(self, X: ScaledMatrix) -> bool:
        """Whether X's residues vanish off the parabolic coordinates."""
        return all(X.entries[i][j] == 0 for i, j in self.opposite_nilradical_coords)

    def to_json(self) -> dict:
        return {
            "composition": list(self.composition),
            "levi": [list(c) for c in self.levi_coords],
            "parabolic": [list(c) for c in self.parabolic_coords],
            "nilradical": [list(c) for c in self.nilradical_coords],
            "opposite_nilradical": [list(c) for c in self.opposite_nilradical_coords],
        }

    @classmethod
    def from_json(cls, d: dict) -> ParabolicData:
        P = cls(tuple(d["composition"]))
        for name, attr in [("levi", "levi_coords"), ("parabolic", "parabolic_coords"),
                           ("nilradical", "nilradical_coords"), ("opposite_nilradical", "opposite_nilradical_coords")]:
            if name in d and [tuple(c) for c in d[name]] != list(getattr(P, attr)):
                raise ValueError(f"inconsistent {name} coordinates for composition {P.composition}")
        return P


def standard_parabolics(n: int) -> list[ParabolicData]:
    """One proper standard parabolic per composition of n other than (n)."""
    if n < 1:
        raise ValueError("n must be positive")
    return [ParabolicData(c) for c in compositions(n) if len(c) > 1]


def trace_pairing_table(n: int) -> dict[tuple[Coord, Coord], int]:
    """tr(E_c E_c') for all pairs of elementary matrices."""
    table = {}
    for c1 in full_coords(n):
        for c2 in full_coords(n):
            A = [[int((i, j) == c1) for j in range(n)] for i in range(n)]
            B = [[int((i, j) == c2) for j in range(n)] for i in range(n)]
            AB = mat_mul(A, B)
            table[c1, c2] = sum(AB[i][i] for i in range(n))
    return table


def orthogonal_coords(coords, n: int) -> tuple[Coord, ...]:
    """Coordinate subspace orthogonal to span(E_c, c in coords) under tr(XY)."""
    table = trace_pairing_table(n)
    cs = set(coords)
    return tuple(c for c in full_coords(n) if all(table[c, d] == 0 for d in cs))


def trace_form(X: ScaledMatrix, Y: ScaledMatrix) -> ScaledResidue:
    return (X @ Y).trace()


# ---------------------------------------------------------------------------
# elliptic elements


@dataclass(frozen=True)
class EllipticityCertificate:
    charpoly: ResiduePolynomial
    irreducible: bool
    valuation: int

    def __bool__(self):
        return self.irreducible

    def to_json(self) -> dict:
        return {"charpoly_mod_p": list(self.charpoly.coeffs), "irreducible": self.irreducible,
                "valuation": self.valuation}


def companion_matrix(f: ResiduePolynomial, prec: int | None = None) -> ScaledMatrix:
    n = f.degree
    prec = f.prec if prec is None else prec
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = -f.coeffs[i]
    return ScaledMatrix(f.p, 0, prec, tuple(map(tuple, rows)))


def companion_elliptic(f: ResiduePolynomial, prec: int | None = None) -> tuple[ScaledMatrix, EllipticityCertificate]:
    """Companion matrix of a monic polynomial irreducible modulo p."""
    if not f.is_monic or f.degree < 1:
        raise ValueError("torus polynomial must be monic of positive degree")
    if not irreducible_over_residue_field(f.mod_p()):
        raise ValueError(f"{f.mod_p()} is reducible modulo {f.p}")
    C = companion_matrix(f, prec)
    return C, EllipticityCertificate(f.mod_p(), True, 0)


def ellipticity_certificate(X: ScaledMatrix) -> EllipticityCertificate:
    """Irreducibility of the mod-p characteristic polynomial of X / p**val(X)."""
    v = lattice_valuation(X)
    if isinstance(v, AtLeast):
        raise PrecisionError(f"X is not determined modulo p (valuation {v})")
    Xn = X.normalized()
    if Xn.prec < 1:
        raise PrecisionError("X is not determined modulo p")
    chi = charpoly_division_free(Xn.with_abs_prec(Xn.scale + 1)).mod_p()
    return EllipticityCertificate(chi, irreducible_over_residue_field(chi), v)


def default_torus_poly(p: int, n: int) -> ResiduePolynomial:
    """Least monic irreducible polynomial mod p, ordering (c0, ..., c_{n-1}) lexicographically."""
    for lower in itertools.product(range(p), repeat=n):
        f = ResiduePolynomial(p, 1, lower + (1,))
        if irreducible_over_residue_field(f):
            return f
    raise RuntimeError("no irreducible polynomial found")  # unreachable: F_{p^n} exists


@dataclass
class EllipticBump:
    """Indicator of ``center + p**depth M_n(Z_p)`` with its certificate."""

    center: ScaledMatrix
    depth: int
    certificate: EllipticityCertificate
    function: SchwartzFunction

    def to_json(self) -> dict:
        return {
            "center": {"scale": self.center.scale, "prec": self.center.prec,
                       "entries": [list(r) for r in self.center.entries]},
            "depth": self.depth,
            "certificate": self.certificate.to_json(),
        }


def elliptic_bump(X0: ScaledMatrix, c: int, pad: int = 0) -> EllipticBump:
    """Indicator function of the certified open coset X0 + p^c M_n(Z_p).

    The window is (min(0, val X0) - pad, c).  For c > v = val(X0) every
    point X0 + E of the coset satisfies (X0 + E)/p^v = X0/p^v mod p, so all
    support points share the certified mod-p characteristic polynomial.
    """
    if c < 1:
        raise ValueError("bump depth must be >= 1")
    cert = ellipticity_certificate(X0)
    if not cert:
        raise ValueError(f"center is not certified elliptic: charpoly {cert.charpoly} is reducible mod p")
    if c <= cert.valuation:
        raise ValueError(f"depth {c} does not exceed the center's valuation {cert.valuation}")
    if X0.abs_prec < c:
        raise PrecisionError(f"center known modulo p^{X0.abs_prec}, bump needs p^{c}")
    a = min(0, cert.valuation) - pad
    window = LatticeWindow.full(X0.p, X0.n, a, c)
    key = window.key_of(X0)
    return EllipticBump(X0.with_abs_prec(c), c, cert, SchwartzFunction.delta(window, key))


# ---------------------------------------------------------------------------
# conjugation


def random_gl(p: int, n: int, prec: int, rng: np.random.Generator) -> ScaledMatrix:
    """Uniform-ish random element of GL_n(Z/p^prec)."""
    m = p**prec
    while True:
        rows = [[int(x) for x in rng.integers(0, m, size=n)] for _ in range(n)]
        if det_mod(rows, p) % p:
            return ScaledMatrix(p, 0, prec, tuple(map(tuple, rows)))


def conjugate_function(phi: SchwartzFunction, g: ScaledMatrix) -> SchwartzFunction:
    """(g . phi)(X) = phi(g^-1 X g) for g in GL_n(Z_p).

    GL_n(Z_p) preserves every p^k M_n(Z_p), so the window is unchanged;
    the point with key r moves to g r g^-1 modulo p^d.
    """
    w = phi.window
    if not w.is_full:
        raise ValueError("conjugation acts on functions on all of gl_n")
    if g.scale != 0 or g.prec < w.depth or det_mod(g.entries, g.p) % g.p == 0:
        raise ValueError("g must be an invertible integral matrix known to the window depth")
    d, q, n = w.depth, w.q, w.n
    if d == 0:
        return phi
    G = np.array(g.entries, dtype=object) % q
    Ginv = np.array(mat_inv_mod(g.entries, g.p, d), dtype=object)
    keys = w.key_array().astype(object).reshape(-1, n, n)
    img = np.einsum("ij,kjl,lm->kim", G, keys, Ginv) % q
    img = img.reshape(-1, n * n).astype(np.int64)
    idx = np.zeros(len(img), dtype=np.int64)
    for col in range(n * n):
        idx = idx * q + img[:, col]
    coeffs, level, pscale = phi.dense()
    out = np.zeros_like(coeffs)
    out[idx] = coeffs
    return SchwartzFunction.from_dense(w, out, level, pscale)
