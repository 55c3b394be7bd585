"""Lifting Lie-algebra cusp forms to GL_n(Q_p) and checking them there.

Two charts identify a neighbourhood of 0 in gl_n with a neighbourhood of 1
in GL_n:

``exp``        X -> exp(X) on p*M_n(Z_p), inverse log; needs p >= 3.
``id-plus-x``  X -> 1 + X, exact and valid for every p.

With L = M_n(Z_p) and K_k = chart(p^k L), a function phi_lam supported in
p^n L and invariant under p^m L (1 <= n <= m) lifts to f(g) = phi_lam(chart^-1 g)
on K_n, zero elsewhere.  It factors through K_n / K_m, so it is stored by
the same keys as phi_lam.  All group arithmetic is done on integer
matrices modulo p**W.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cyclotomic import Cyclotomic
from .errors import CuspViolation, DomainViolation, InsufficientPrecision, ReductionMismatch
from .lattice import Key, LatticeWindow, SchwartzFunction, fibre_integrals
from .padic import (
    AtLeast,
    IntMatrix,
    ScaledMatrix,
    exp_int,
    exp_truncated,
    lattice_valuation,
    log_batch,
    log_int,
    log_truncated,
    mat_identity,
    mat_mul,
    vp,
)

MODELS = ("exp", "id-plus-x")


def lambda_threshold(n0: int, n1: int) -> int:
    """Smallest val(lambda) for which the lift is guaranteed cuspidal: 2*n1 + n0."""
    if n0 < 0 or n1 < 0:
        raise ValueError("n0 and n1 must be non-negative")
    return 2 * n1 + n0


def support_level(val_lambda: int, n1: int) -> int:
    """n = val(lambda) - n1: the scaled support sits in p^n L."""
    return val_lambda - n1


def window_constants(window: LatticeWindow) -> tuple[int, int]:
    """(n0, n1) for a function on ``window``: invariance under p^n0 L, support in p^-n1 L."""
    return max(0, window.b), max(0, -window.a)


def required_precision(n_level: int, m_level: int) -> int:
    """Working exponent that keeps every BCH defect of the sweep visible."""
    return m_level + 2 * n_level + 2


# ---------------------------------------------------------------------------
# BCH estimate


@dataclass
class BCHWitness:
    X: ScaledMatrix
    Y: ScaledMatrix
    defect: ScaledMatrix
    required_valuation: int
    defect_valuation: int | AtLeast
    holds: bool

    def to_json(self) -> dict:
        dv = self.defect_valuation
        return {
            "X": [list(r) for r in self.X.entries], "X_scale": self.X.scale,
            "Y": [list(r) for r in self.Y.entries], "Y_scale": self.Y.scale,
            "required_valuation": self.required_valuation,
            "defect_valuation": dv if isinstance(dv, int) else str(dv),
            "holds": self.holds,
        }


def bch_defect_check(X: ScaledMatrix, Y: ScaledMatrix) -> BCHWitness:
    """log(e^X e^Y) - X - Y and whether it lies in p^(val X + val Y) L."""
    vX, vY = lattice_valuation(X), lattice_valuation(Y)
    if isinstance(vX, AtLeast) or isinstance(vY, AtLeast):
        raise InsufficientPrecision("the valuations of X and Y must be determined")
    required = vX + vY
    A = min(X.abs_prec, Y.abs_prec)
    if A < required + 1:
        raise InsufficientPrecision(f"precision p^{A} cannot resolve valuation {required}")
    X, Y = X.with_abs_prec(A), Y.with_abs_prec(A)
    Z = log_truncated(exp_truncated(X) @ exp_truncated(Y))
    defect = Z - X - Y
    dv = lattice_valuation(defect)
    holds = dv.bound >= required if isinstance(dv, AtLeast) else dv >= required
    return BCHWitness(X, Y, defect, required, dv, holds)


# ---------------------------------------------------------------------------
# charts on integer matrices mod p^W


def _valuation_int(M: IntMatrix, p: int) -> int | None:
    vals = [vp(x, p) for r in M for x in r if x]
    return min(vals) if vals else None


def chart(X: IntMatrix, model: str, p: int, W: int) -> IntMatrix:
    """Group element attached to the Lie algebra element X (integer matrix)."""
    m = p**W
    n = len(X)
    if model == "id-plus-x":
        return [[(X[i][j] + (i == j)) % m for j in range(n)] for i in range(n)]
    v = _valuation_int([[x % m for x in r] for r in X], p)
    if v is None:
        return mat_identity(n)
    q = p**v
    return exp_int([[(x % m) // q for x in r] for r in X], v, p, W)


def chart_inverse(g: IntMatrix, model: str, p: int, W: int) -> IntMatrix:
    m = p**W
    n = len(g)
    if model == "id-plus-x":
        return [[(g[i][j] - (i == j)) % m for j in range(n)] for i in range(n)]
    return log_int(g, p, W)


def _in_first_congruence(g: IntMatrix, p: int) -> bool:
    n = len(g)
    return all((g[i][j] - (i == j)) % p == 0 for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# group functions


@dataclass
class GroupFunction:
    """f on GL_n(Q_p), supported in K_n and right K_m-invariant.

    ``values`` is keyed like a function on the window (n_level, m_level):
    the key of g in K_n is the residue vector of chart^-1(g) / p^n_level
    modulo p^(m_level - n_level).
    """

    model: str
    p: int
    size: int
    n_level: int
    m_level: int
    precision: int
    values: dict[Key, Cyclotomic]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n_level < 1:
            raise DomainViolation("K_n is a group only for n >= 1")
        if self.model == "exp" and self.p < 3:
            raise DomainViolation("the exponential chart needs p >= 3; use id-plus-x")
        if self.precision < self.m_level:
            raise InsufficientPrecision("working precision below the invariance level")
        self.values = {k: v for k, v in self.values.items() if not v.is_zero()}

    @property
    def window(self) -> LatticeWindow:
        return LatticeWindow.full(self.p, self.size, self.n_level, self.m_level)

    def chart_function(self) -> SchwartzFunction:
        """The Lie-algebra function f o chart on the window."""
        return SchwartzFunction(self.window, self.values)

    def key_of(self, g: IntMatrix) -> Key | None:
        """Key of g's K_m-coset, or None if g is outside K_n."""
        p, W = self.p, self.precision
        if not _in_first_congruence(g, p):
            return None
        X = chart_inverse(g, self.model, p, W)
        v = _valuation_int(X, p)
        if v is not None and v < self.n_level:
            return None
        q = p ** (self.m_level - self.n_level)
        s = p**self.n_level
        return tuple((x // s) % q for r in X for x in r)

    def __call__(self, g: IntMatrix) -> Cyclotomic:
        key = self.key_of(g)
        if key is None:
            return Cyclotomic.zero(self.p)
        return self.values.get(key, Cyclotomic.zero(self.p))

    def element(self, key: Key) -> IntMatrix:
        """Coset representative chart(p^n_level * key)."""
        n = self.size
        s = self.p**self.n_level
        X = [[key[i * n + j] * s for j in range(n)] for i in range(n)]
        return chart(X, self.model, self.p, self.precision)

    def is_zero(self) -> bool:
        return not self.values

    def to_json(self) -> dict:
        return {
            "model": self.model, "p": self.p, "n": self.size,
            "n_level": self.n_level, "m_level": self.m_level, "precision": self.precision,
            "provenance": dict(self.provenance),
            "entries": [{"coset": list(k), "value": self.values[k].to_json()} for k in sorted(self.values)],
        }

    @classmethod
    def from_json(cls, d: dict) -> GroupFunction:
        p = int(d["p"])
        vals = {tuple(e["coset"]): Cyclotomic.from_json(p, e["value"]) for e in d["entries"]}
        return cls(d["model"], p, int(d["n"]), int(d["n_level"]), int(d["m_level"]),
                   int(d["precision"]), vals, dict(d.get("provenance", {})))


def lift_to_group(phi_lam: SchwartzFunction, model: str = "exp", precision: int | None = None,
                  provenance: dict | None = None) -> GroupFunction:
    """f(g) = phi_lam(X) if g = chart(X) with X in the support window, else 0."""
    w = phi_lam.window
    if not w.is_full:
        raise ValueError("lift needs a function on all of gl_n")
    if w.a < 1:
        raise DomainViolation(f"support scale {w.a} < 1: the support is not inside the chart domain p*M_n(Z_p)")
    need = required_precision(w.a, w.b)
    W = need if precision is None else precision
    if W < need:
        raise InsufficientPrecision(f"working precision {W} < required {need} = m + 2n + 2")
    return GroupFunction(model, w.p, w.n, w.a, w.b, W, dict(phi_lam.values), dict(provenance or {}))


def chart_change(g: IntMatrix, source: str, target: str, p: int, W: int) -> IntMatrix:
    """The bijection of K_n sending source-chart(X) to target-chart(X)."""
    if source == target:
        return [list(r) for r in g]
    return chart(chart_inverse(g, source, p, W), target, p, W)


def charts_agree(f: GroupFunction, h: GroupFunction) -> int:
    """Check f(g) = h(c(g)) with c the chart change, on every coset of both.

    Returns the number of cosets compared; raises ReductionMismatch.
    """
    if (f.p, f.size, f.n_level, f.m_level) != (h.p, h.size, h.n_level, h.m_level):
        raise ValueError("group functions live on different quotients")
    W = min(f.precision, h.precision)
    count = 0
    for a, b in ((f, h), (h, f)):
        for key in a.window.points():
            g = a.element(key)
            lhs, rhs = a(g), b(chart_change(g, a.model, b.model, a.p, W))
            if lhs != rhs:
                raise ReductionMismatch(f"{a.model} and {b.model} lifts differ at coset {key}",
                                        {"coset": list(key), "lhs": lhs.to_json(), "rhs": rhs.to_json()})
            count += 1
    return count


# ---------------------------------------------------------------------------
# group cusp verification


@dataclass
class GroupCuspReport:
    passed: bool
    cosets: int
    per_parabolic: list[dict] = field(default_factory=list)
    reduction_checks: int = 0
    outside_checked: int = 0

    def to_json(self) -> dict:
        return {"passed": self.passed, "cosets": self.cosets, "per_parabolic": self.per_parabolic,
                "reduction_checks": self.reduction_checks, "outside_checked": self.outside_checked}


def _nilradical_elements(f: GroupFunction, coords, depth_from: int) -> list[tuple[Key, IntMatrix]]:
    """chart(u) for u in p^depth_from L_N / p^m L_N, u in the given coordinates."""
    p, n = f.p, f.size
    q = p ** (f.m_level - depth_from)
    s = p**depth_from
    out = []
    for digits in itertools.product(range(q), repeat=len(coords)):
        U = [[0] * n for _ in range(n)]
        for (i, j), r in zip(coords, digits):
            U[i][j] = r * s
        out.append((digits, chart(U, f.model, p, f.precision)))
    return out


def _sum_group_ring(vals: list[Cyclotomic], p: int) -> Cyclotomic:
    vals = [v for v in vals if not v.is_zero()]
    if not vals:
        return Cyclotomic.zero(p)
    level = max(v.level for v in vals)
    ps = min(v.pscale for v in vals)
    acc = [0] * p**level
    for v in vals:
        for k, c in enumerate(v.group_ring(level, ps)):
            acc[k] += c
    return Cyclotomic.from_group_ring(p, level, acc, ps)


def _coset_index(f: GroupFunction, G: np.ndarray) -> np.ndarray:
    """Flat window index of each g in a stack, or -1 where g lies outside K_n."""
    p, W = f.p, f.precision
    m = p**W
    if f.model == "id-plus-x":
        X = (G - np.eye(f.size, dtype=G.dtype)) % m
    else:
        X = log_batch(G, p, W)
    X = X.reshape(len(X), -1)
    s = p**f.n_level
    inside = np.all(X % s == 0, axis=1)
    q = p ** (f.m_level - f.n_level)
    D = (X // s) % q
    idx = np.zeros(len(X), dtype=np.int64)
    for col in range(D.shape[1]):
        idx = idx * q + D[:, col].astype(np.int64)
    return np.where(inside, idx, -1)


def _value_table(f: GroupFunction) -> tuple[np.ndarray, int, int]:
    """Dense reduced coefficients of f on K_n / K_m, plus a trailing zero row for index -1."""
    coeffs, level, ps = f.chart_function().dense()
    return np.concatenate([coeffs, np.zeros_like(coeffs[:1])]), level, ps


def _products(xs: np.ndarray, us: np.ndarray, m: int) -> np.ndarray:
    """All x @ u mod m, shape (len(xs) * len(us), n, n), x-major."""
    dtype = np.int64 if xs.shape[-1] * m * m < 2**62 else object
    P = np.einsum("aij,bjk->abik", xs.astype(dtype), us.astype(dtype)) % m
    return P.reshape(-1, xs.shape[-1], xs.shape[-1])


def _sum_over_units(f: GroupFunction, xs: np.ndarray, units: list, table: np.ndarray) -> np.ndarray:
    """For each x, the coefficient sum of f(x u) over the unit list; shape (len(xs), phi)."""
    us = np.array([u for _, u in units], dtype=object)
    m = f.p**f.precision
    out = []
    step = max(1, 200_000 // max(1, len(units)))
    for lo in range(0, len(xs), step):
        idx = _coset_index(f, _products(xs[lo:lo + step], us, m))
        vals = table[idx].reshape(-1, len(units), table.shape[1])
        out.append(vals.sum(axis=1))
    return np.concatenate(out)


def _witness(P, g: IntMatrix, value: Cyclotomic, **extra) -> dict:
    d = {"parabolic": P.label, "x": [list(r) for r in g], "value": value.to_json(), "abs": abs(value.to_complex())}
    d.update(extra)
    return d


def group_cusp_verify(f: GroupFunction, parabolics: Sequence, phi_lam: SchwartzFunction | None = None,
                      outside_samples: int = 20, seed: int = 0) -> GroupCuspReport:
    """Exact unipotent integrals of f over N(F), for every coset x of K_n / K_m.

    The integral over N(F) of f(x n) is a finite sum over chart(p^n L_N) / chart(p^m L_N)
    with each coset of volume p^(-m dim N).  It is compared with the additive
    integral of phi_lam over x's Lie coordinate plus n, then required to be 0.
    Randomly drawn x with x N(F) disjoint from K_n are checked to have an
    identically vanishing integrand.
    """
    p = f.p
    if phi_lam is None:
        phi_lam = f.chart_function()
    w = f.window
    if phi_lam.window != w:
        raise ValueError("phi_lam must live on the window of f")
    rng = np.random.default_rng(seed)
    keys = list(w.points())
    xs = np.array([f.element(k) for k in keys], dtype=object)
    table, level, ps = _value_table(f)
    m = p**f.precision
    report = GroupCuspReport(passed=False, cosets=len(keys))
    for P in parabolics:
        nil = P.nilradical_coords
        units = _nilradical_elements(f, nil, f.n_level)
        vol = -f.m_level * len(nil)
        group_side = _sum_over_units(f, xs, units, table)
        # Lie side: marginal sums of phi_lam along the nilradical coordinates
        S, lvl, lps, rest = fibre_integrals(phi_lam, nil)
        pos = [w.coords.index(c) for c in rest]
        K = np.array(keys, dtype=np.int64).reshape(len(keys), -1)
        lie_side = S[tuple(K[:, j] for j in pos)]
        for r in range(len(keys)):
            g_val = Cyclotomic(p, level, ps + vol, tuple(int(c) for c in group_side[r]))
            l_val = Cyclotomic(p, lvl, lps, tuple(int(c) for c in lie_side[r]))
            if g_val != l_val:
                raise ReductionMismatch(
                    f"group integral {g_val} != Lie integral {l_val} along {P.label}",
                    _witness(P, xs[r].tolist(), g_val, lie_value=l_val.to_json()),
                )
            if not g_val.is_zero():
                raise CuspViolation(f"nonzero group cusp integral along {P.label} at coset {keys[r]}",
                                    _witness(P, xs[r].tolist(), g_val))
        report.reduction_checks += len(keys)
        zeros = len(keys)
        outside = 0
        for _ in range(outside_samples):
            x = _outside_element(f, P, rng)
            for _ in range(5):
                U = [[0] * f.size for _ in range(f.size)]
                for i, j in nil:
                    U[i][j] = int(rng.integers(0, m))
                nelt = chart(U, "id-plus-x", p, f.precision)
                val = f(mat_mul(x, nelt, m))
                if not val.is_zero():
                    raise CuspViolation(f"integrand nonzero at x outside K_n N(F) along {P.label}",
                                        _witness(P, x, val))
                outside += 1
        report.outside_checked += outside
        report.per_parabolic.append({"composition": list(P.composition), "cosets": len(keys),
                                     "unipotent_cosets": len(units), "zeros": zeros,
                                     "outside_checked": outside, "max_abs": 0.0})
    report.passed = True
    return report


def _outside_element(f: GroupFunction, P, rng: np.random.Generator) -> IntMatrix:
    """Random x in GL_n(Z_p) whose first block column differs from 1's modulo p^n.

    Right multiplication by N(F) never changes the first block column, so
    x N(F) misses K_n.
    """
    p, n = f.p, f.size
    W = f.precision
    m = p**W
    first = P.composition[0]
    from .padic import det_mod

    while True:
        g = [[int(x) for x in rng.integers(0, m, size=n)] for _ in range(n)]
        if det_mod(g, p) % p == 0:
            continue
        if any(((g[i][j] - (i == j)) % p**f.n_level) for i in range(n) for j in range(first)):
            return g


# ---------------------------------------------------------------------------
# finite-level Jacquet vanishing


@dataclass
class JacquetResult:
    composition: tuple[int, ...]
    k: int
    passed: bool
    cosets_checked: int
    subgroup_level: int

    def to_json(self) -> dict:
        return {"composition": list(self.composition), "k": self.k, "passed": self.passed,
                "cosets_checked": self.cosets_checked, "subgroup_level": self.subgroup_level}


def jacquet_vanishing_check(f: GroupFunction, P) -> JacquetResult:
    """Least exhaustion index k separating Supp(f) from Supp(f)(N(F) - N(F)_k), then exact vanishing.

    Indexing: N(F)_k = chart(p^(m-k) L_N), an increasing exhaustion of N(F)
    with N(F)_0 inside K_m.  If s and s n' both lie in Supp(f) then n' lies in
    K_n ∩ N(F), so k is read off the smallest valuation of such n'.  The
    integral of f(x n) over N(F)_k is then checked to vanish for every coset x
    of K_n / K_m, which contains Supp(f) N(F)_k.
    """
    p = f.p
    nil = P.nilradical_coords
    if f.is_zero():
        return JacquetResult(P.composition, 0, True, 0, f.m_level)
    m = p**f.precision
    units = [(d, u) for d, u in _nilradical_elements(f, nil, f.n_level) if any(d)]
    support = sorted(f.values)
    xs = np.array([f.element(key) for key in support], dtype=object)
    vmin = None
    if units:
        table, _, _ = _value_table(f)
        us = np.array([u for _, u in units], dtype=object)
        udeg = [f.n_level + min(vp(r, p) if r else f.m_level for r in d) for d, _ in units]
        hit = np.zeros(len(units), dtype=bool)
        step = max(1, 200_000 // len(units))
        for lo in range(0, len(xs), step):
            idx = _coset_index(f, _products(xs[lo:lo + step], us, m)).reshape(-1, len(units))
            vals = table[idx]
            hit |= np.any(vals != 0, axis=(0, 2))
        if hit.any():
            vmin = min(v for v, h in zip(udeg, hit) if h)
    k = 0 if vmin is None else max(0, f.m_level - vmin)
    level = f.m_level - k
    sub = _nilradical_elements(f, nil, level)
    vol = -f.m_level * len(nil)
    keys = list(f.window.points())
    all_xs = np.array([f.element(key) for key in keys], dtype=object)
    table, lv, ps = _value_table(f)
    sums = _sum_over_units(f, all_xs, sub, table)
    for r in np.flatnonzero(np.any(sums != 0, axis=1)):
        total = Cyclotomic(p, lv, ps + vol, tuple(int(c) for c in sums[r]))
        if not total.is_zero():
            raise CuspViolation(f"integral over N(F)_{k} does not vanish along {P.label}",
                                _witness(P, all_xs[r].tolist(), total, k=k))
    checked = len(keys)
    return JacquetResult(P.composition, k, True, checked, level)
