"""Locally constant, compactly supported functions on coordinate subspaces of gl_n(Q_p).

A function supported in ``p**a L_V`` and invariant under ``p**b L_V``
(``L_V = V ∩ M_n(Z_p)``) is a function on the finite group
``p**a L_V / p**b L_V``.  A point of that group is a *key*: the tuple of
residues ``X_ij / p**a mod p**(b-a)`` over the coordinates of ``V`` in
row-major order.

Measures are normalized by ``vol(L_V) = 1`` for every coordinate subspace
and the character is ``psi(x) = exp(2 pi i {x}_p)``, trivial exactly on
``Z_p``.  With the trace pairing ``tr(XY)`` the lattice ``M_n(Z_p)`` is its
own dual, so Fourier inversion holds with no constant.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cyclotomic import Cyclotomic, reduce_group_ring, totient
from .errors import CuspViolation, PrecisionError
from .padic import ScaledMatrix, ScaledResidue, vp

Coord = tuple[int, int]
Key = tuple[int, ...]

_INT64_SAFE = 2**62


def full_coords(n: int) -> tuple[Coord, ...]:
    return tuple((i, j) for i in range(n) for j in range(n))


def _as_array(rows, bound: int | None = None) -> np.ndarray:
    arr = np.asarray(rows, dtype=object)
    if bound is None:
        bound = max((abs(int(x)) for x in arr.flat), default=0)
    if bound < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


def _max_abs(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    return int(np.abs(arr).max())


def _widen(arr: np.ndarray, bound: int) -> np.ndarray:
    """Switch to Python-int storage when ``bound`` could overflow int64."""
    if arr.dtype != object and bound >= _INT64_SAFE:
        return arr.astype(object)
    return arr


@dataclass(frozen=True)
class LatticeWindow:
    """The finite quotient ``p**a L_V / p**b L_V`` for a coordinate subspace V."""

    p: int
    n: int
    coords: tuple[Coord, ...]
    a: int
    b: int

    def __post_init__(self):
        coords = tuple(sorted((int(i), int(j)) for i, j in self.coords))
        if len(set(coords)) != len(coords) or any(not (0 <= i < self.n and 0 <= j < self.n) for i, j in coords):
            raise ValueError("coordinates must be distinct matrix positions")
        if self.b < self.a:
            raise ValueError("invariance scale b must be >= support scale a")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def full(cls, p: int, n: int, a: int, b: int) -> LatticeWindow:
        return cls(p, n, full_coords(n), a, b)

    @property
    def depth(self) -> int:
        return self.b - self.a

    @property
    def q(self) -> int:
        return self.p**self.depth

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def size(self) -> int:
        return self.q**self.dim

    @property
    def is_full(self) -> bool:
        return self.coords == full_coords(self.n)

    def dual(self) -> LatticeWindow:
        return LatticeWindow(self.p, self.n, self.coords, -self.b, -self.a)

    def shifted(self, v: int) -> LatticeWindow:
        return LatticeWindow(self.p, self.n, self.coords, self.a + v, self.b + v)

    def points(self) -> Iterator[Key]:
        return itertools.product(range(self.q), repeat=self.dim)

    def key_array(self) -> np.ndarray:
        """All keys, shape (size, dim), in flat-index order."""
        if self.dim == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices((self.q,) * self.dim).reshape(self.dim, -1).T
        return grids.astype(np.int64)

    def index(self, key: Key) -> int:
        i = 0
        for r in key:
            i = i * self.q + r
        return i

    def point(self, key: Key) -> ScaledMatrix:
        rows = [[0] * self.n for _ in range(self.n)]
        for (i, j), r in zip(self.coords, key):
            rows[i][j] = r
        return ScaledMatrix(self.p, self.a, self.depth, tuple(map(tuple, rows)))

    def key_of(self, X: ScaledMatrix) -> Key | None:
        """Key of the coset containing X, or None when X is off the support.

        Raises PrecisionError when X is not known modulo ``p**b`` and is not
        already certified to lie outside ``p**a L_V``.
        """
        if X.p != self.p or X.n != self.n:
            raise ValueError("point does not belong to this window's space")
        inside = set(self.coords)
        for i in range(self.n):
            for j in range(self.n):
                if (i, j) not in inside and X.entries[i][j]:
                    return None
        for i, j in self.coords:
            v = X.entry_valuation(i, j)
            if v is not None and v < self.a:
                return None
        if X.abs_prec < self.b:
            raise PrecisionError(f"point known modulo p^{X.abs_prec}, window needs p^{self.b}")
        return _residues_at(X, self.coords, self.a, self.depth)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "subspace": [list(c) for c in self.coords], "a": self.a, "b": self.b}


def _residues_at(X: ScaledMatrix, coords: Sequence[Coord], a: int, d: int) -> Key:
    """Residues of X_ij / p**a modulo p**d; entries must have valuation >= a."""
    p = X.p
    q = p**d
    out = []
    for i, j in coords:
        x = X.entries[i][j]
        if X.scale >= a:
            out.append(x * p ** (X.scale - a) % q)
        else:
            out.append(x // p ** (a - X.scale) % q)
    return tuple(out)


class SchwartzFunction:
    """A function on ``window``'s point set with exact cyclotomic values.

    Storage is either a sparse ``{key: Cyclotomic}`` dict (zeros omitted) or
    a dense array of reduced cyclotomic coefficients ``(size, phi(p**level))``
    with one common ``pscale``.  Each form is built from the other on demand.
    """

    def __init__(self, window: LatticeWindow, values: dict[Key, Cyclotomic] | None = None):
        self.window = window
        vals = {}
        for key, v in (values or {}).items():
            key = tuple(int(r) for r in key)
            if len(key) != window.dim or any(not 0 <= r < window.q for r in key):
                raise ValueError(f"key {key} is not a point of the window")
            if v.p != window.p:
                raise ValueError("value over a different prime")
            if not v.is_zero():
                vals[key] = v
        self._values: dict[Key, Cyclotomic] | None = vals
        self._dense: tuple[np.ndarray, int, int] | None = None

    @classmethod
    def from_dense(cls, window: LatticeWindow, coeffs: np.ndarray, level: int, pscale: int) -> SchwartzFunction:
        if coeffs.shape != (window.size, totient(window.p, level)):
            raise ValueError("dense array has the wrong shape")
        obj = cls.__new__(cls)
        obj.window = window
        obj._values = None
        obj._dense = (coeffs, level, pscale)
        return obj

    @classmethod
    def indicator(cls, window: LatticeWindow, keys: Iterable[Key] | None = None) -> SchwartzFunction:
        one = Cyclotomic.integer(window.p, 1)
        if keys is None:
            keys = window.points()
        return cls(window, {k: one for k in keys})

    @classmethod
    def delta(cls, window: LatticeWindow, key: Key | None = None) -> SchwartzFunction:
        key = key if key is not None else (0,) * window.dim
        return cls(window, {key: Cyclotomic.integer(window.p, 1)})

    # -- storage ------------------------------------------------------------

    @property
    def p(self) -> int:
        return self.window.p

    @property
    def values(self) -> dict[Key, Cyclotomic]:
        if self._values is None:
            coeffs, level, pscale = self._dense
            keys = self.window.key_array()
            nz = np.flatnonzero(np.any(coeffs != 0, axis=1))
            p = self.p
            self._values = {
                tuple(int(r) for r in keys[i]): Cyclotomic(p, level, pscale, tuple(int(x) for x in coeffs[i]))
                for i in nz
            }
        return self._values

    @property
    def level(self) -> int:
        if self._dense is not None:
            return self._dense[1]
        return max((v.level for v in self._values.values()), default=0)

    def dense(self, level: int | None = None, pscale: int | None = None) -> tuple[np.ndarray, int, int]:
        """Reduced coefficient array at (at least) the given level, at most the given pscale."""
        if self._dense is None:
            vals = self._values
            lvl = max((v.level for v in vals.values()), default=0)
            ps = min((v.pscale for v in vals.values()), default=0)
            rows = [[0] * totient(self.p, lvl) for _ in range(self.window.size)]
            for key, v in vals.items():
                rows[self.window.index(key)] = v.embed(lvl, ps)
            arr = _as_array(rows) if rows else np.zeros((0, totient(self.p, lvl)), dtype=np.int64)
            self._dense = (arr, lvl, ps)
        arr, lvl, ps = self._dense
        target_level = lvl if level is None else level
        target_ps = ps if pscale is None else pscale
        if target_level < lvl or target_ps > ps:
            raise ValueError("dense form can only be embedded upwards")
        if target_level > lvl:
            step = self.p ** (target_level - lvl)
            wide = np.zeros((arr.shape[0], totient(self.p, target_level)), dtype=arr.dtype)
            wide[:, ::step][:, : arr.shape[1]] = arr
            arr = wide
        if target_ps < ps:
            mult = self.p ** (ps - target_ps)
            arr = _widen(arr, _max_abs(arr) * mult) * mult
        return arr, target_level, target_ps

    def group_ring(self, level: int) -> tuple[np.ndarray, int]:
        """Coefficients indexed by Z/p**level (unreduced), shape (size, p**level)."""
        arr, lvl, ps = self.dense(level=level)
        Q = self.p**lvl
        out = np.zeros((arr.shape[0], Q), dtype=arr.dtype)
        out[:, : arr.shape[1]] = arr
        return out, ps

    # -- evaluation ---------------------------------------------------------

    def at_key(self, key: Key) -> Cyclotomic:
        if self._values is not None:
            return self._values.get(tuple(key), Cyclotomic.zero(self.p))
        coeffs, level, pscale = self._dense
        row = coeffs[self.window.index(key)]
        return Cyclotomic(self.p, level, pscale, tuple(int(x) for x in row))

    def __call__(self, X: ScaledMatrix) -> Cyclotomic:
        key = self.window.key_of(X)
        if key is None:
            return Cyclotomic.zero(self.p)
        return self.at_key(key)

    def support(self) -> list[Key]:
        return sorted(self.values)

    def is_zero(self) -> bool:
        if self._values is not None:
            return not self._values
        return not np.any(self._dense[0] != 0)

    def __eq__(self, other):
        if not isinstance(other, SchwartzFunction):
            return NotImplemented
        if self.window != other.window:
            return False
        if self._values is not None and other._values is not None:
            return self._values == other._values
        a, la, sa = self.dense()
        b, lb, sb = other.dense()
        lvl, ps = max(la, lb), min(sa, sb)
        return bool(np.array_equal(self.dense(lvl, ps)[0], other.dense(lvl, ps)[0]))

    __hash__ = None

    def __repr__(self):
        w = self.window
        return f"SchwartzFunction(p={w.p}, n={w.n}, dim={w.dim}, window=({w.a},{w.b}), support={len(self.values)})"

    # -- simple operations --------------------------------------------------

    def reflect(self) -> SchwartzFunction:
        """X -> f(-X)."""
        q = self.window.q
        return SchwartzFunction(self.window, {tuple((-r) % q for r in k): v for k, v in self.values.items()})

    def scaled_values(self, c: Cyclotomic) -> SchwartzFunction:
        return SchwartzFunction(self.window, {k: v * c for k, v in self.values.items()})

    def __add__(self, other: SchwartzFunction) -> SchwartzFunction:
        if self.window != other.window:
            raise ValueError("windows differ")
        out = dict(self.values)
        for k, v in other.values.items():
            out[k] = out[k] + v if k in out else v
        return SchwartzFunction(self.window, out)

    def extend(self, a: int, b: int) -> SchwartzFunction:
        """Same function viewed on a larger window (a <= self.a, b >= self.b)."""
        w = self.window
        if a > w.a or b < w.b:
            raise ValueError("can only enlarge the window")
        new = LatticeWindow(w.p, w.n, w.coords, a, b)
        p = w.p
        lift = p ** (w.a - a)
        tails = list(itertools.product(range(p ** (b - w.b)), repeat=w.dim))
        out = {}
        for key, v in self.values.items():
            base = [r * lift for r in key]
            for t in tails:
                out[tuple(x + y * p ** (w.b - a) for x, y in zip(base, t))] = v
        return SchwartzFunction(new, out)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        d = self.window.to_json()
        d["entries"] = [{"point": list(k), "value": self.values[k].to_json()} for k in sorted(self.values)]
        return d

    @classmethod
    def from_json(cls, d: dict) -> SchwartzFunction:
        w = LatticeWindow(int(d["p"]), int(d["n"]), tuple(tuple(c) for c in d["subspace"]), int(d["a"]), int(d["b"]))
        vals = {tuple(e["point"]): Cyclotomic.from_json(w.p, e["value"]) for e in d["entries"]}
        return cls(w, vals)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, s: str) -> SchwartzFunction:
        return cls.from_json(json.loads(s))


def random_schwartz(window: LatticeWindow, rng: np.random.Generator, density: float = 0.5,
                    max_abs: int = 3, level: int = 0) -> SchwartzFunction:
    """Random function with integer (or level-``level`` cyclotomic) values."""
    p = window.p
    phi = totient(p, level)
    vals = {}
    for key in window.points():
        if rng.random() < density:
            coeffs = tuple(int(c) for c in rng.integers(-max_abs, max_abs + 1, size=phi))
            vals[key] = Cyclotomic(p, level, 0, coeffs)
    return SchwartzFunction(window, vals)


# ---------------------------------------------------------------------------
# scaling


def scale_function(phi: SchwartzFunction, lam: ScaledResidue) -> SchwartzFunction:
    """phi_lam(X) = phi(X / lam), living on the window shifted by val(lam)."""
    if lam.p != phi.p:
        raise ValueError("scalar over a different prime")
    if lam.is_zero():
        raise ValueError("lambda must be nonzero")
    w = phi.window
    if lam.prec < w.depth:
        raise PrecisionError("lambda's unit part is not known to the window depth")
    v, u = lam.scale, lam.residue
    q = w.q
    out = {tuple(u * r % q for r in k): val for k, val in phi.values.items()}
    return SchwartzFunction(w.shifted(v), out)


# ---------------------------------------------------------------------------
# Fourier transform on the full space


def _transpose_perm(coords: Sequence[Coord]) -> list[int]:
    pos = {c: k for k, c in enumerate(coords)}
    return [pos[(j, i)] for i, j in coords]


def _finish_transform(window: LatticeWindow, out: np.ndarray, level: int, pscale: int) -> SchwartzFunction:
    coeffs = reduce_group_ring(out, window.p, level)
    return SchwartzFunction.from_dense(window.dual(), coeffs, level, pscale - window.b * window.dim)


def fourier_transform(phi: SchwartzFunction) -> SchwartzFunction:
    """Direct character sum: phi_hat(Y) = vol(p^b L) * sum_X phi(X) psi(tr(XY)).

    Window (a, b) goes to (-b, -a).  With X = p^a r and Y = p^-b s the
    pairing is p^-(b-a) sum_ij r_ij s_ji, so the kernel is a power of
    zeta_{p^d}.  Cost O(|supp phi| * size).
    """
    w = phi.window
    if not w.is_full:
        raise ValueError("the transform is defined on the full space gl_n")
    p, d = w.p, w.depth
    level = max(d, phi.level)
    Q = p**level
    step = p ** (level - d)
    perm = _transpose_perm(w.coords)
    S = w.key_array()[:, perm]
    rows = np.arange(w.size)
    vals = phi.values
    ps = min((v.pscale for v in vals.values()), default=0)
    bound = sum(sum(abs(c) for c in v.embed(v.level, ps)) for v in vals.values())
    out = np.zeros((w.size, Q), dtype=object if bound >= _INT64_SAFE else np.int64)
    for key, v in vals.items():
        e = (S @ np.asarray(key, dtype=np.int64)) % w.q * step
        for k, c in enumerate(v.group_ring(level, ps)):
            if c:
                out[rows, (e + k) % Q] += c
    return _finish_transform(w, out, level, ps)


def fourier_separable(phi: SchwartzFunction) -> SchwartzFunction:
    """Same transform as :func:`fourier_transform`, one coordinate at a time.

    tr(XY) = sum_ij X_ij Y_ji makes the kernel a product of one-dimensional
    kernels, so the sum factors into ``dim`` transforms of length p^d; the
    coordinate (i, j) of the input feeds coordinate (j, i) of the output.
    Cost O(size * p^d * dim) group-ring shifts.
    """
    w = phi.window
    if not w.is_full:
        raise ValueError("the transform is defined on the full space gl_n")
    p, q, dim = w.p, w.q, w.dim
    level = max(w.depth, phi.level)
    Q = p**level
    step = p ** (level - w.depth)
    gr, ps = phi.group_ring(level)
    gr = _widen(gr, _max_abs(gr) * w.size * 2)
    A = gr.reshape((q,) * dim + (Q,))
    for ax in range(dim):
        A0 = np.moveaxis(A, ax, 0)
        B0 = np.zeros_like(A0)
        for y in range(q):
            acc = B0[y]
            for x in range(q):
                acc += np.roll(A0[x], (x * y * step) % Q, axis=-1)
        A = np.moveaxis(B0, 0, ax)
    perm = _transpose_perm(w.coords)
    A = np.transpose(A, perm + [dim])
    return _finish_transform(w, np.ascontiguousarray(A).reshape(w.size, Q), level, ps)


# ---------------------------------------------------------------------------
# integrals over affine slices


def integrate_affine_slice(phi: SchwartzFunction, direction: Iterable[Coord], X: ScaledMatrix) -> Cyclotomic:
    """Integral of N -> phi(X + N) over the coordinate subspace ``direction``.

    Haar measure has vol(L_direction) = 1.  The integral only depends on X
    modulo ``direction``, so X's coordinates along it are dropped first;
    the remaining sum runs over p^a L / p^b L of the direction.
    """
    w = phi.window
    direction = tuple(sorted(tuple(c) for c in direction))
    if not set(direction) <= set(w.coords):
        raise ValueError("direction must lie inside the function's subspace")
    p = w.p
    zero = Cyclotomic.zero(p)
    dset = set(direction)
    rest = [c for c in w.coords if c not in dset]
    inside = set(w.coords)
    for i in range(w.n):
        for j in range(w.n):
            if (i, j) not in inside and X.entries[i][j]:
                return zero
    for i, j in rest:
        v = X.entry_valuation(i, j)
        if v is not None and v < w.a:
            return zero
    if rest and X.abs_prec < w.b:
        raise PrecisionError(f"base point known modulo p^{X.abs_prec}, need p^{w.b}")
    base = dict(zip(rest, _residues_at(X, rest, w.a, w.depth))) if rest else {}
    total = zero
    for fibre in itertools.product(range(w.q), repeat=len(direction)):
        base.update(zip(direction, fibre))
        total = total + phi.at_key(tuple(base[c] for c in w.coords))
    return total.rescale(-w.b * len(direction))


def fibre_integrals(phi: SchwartzFunction, direction: Iterable[Coord]) -> tuple[np.ndarray, int, int, list[Coord]]:
    """All slice integrals at once: dense sums over the ``direction`` axes.

    Returns ``(coeffs, level, pscale, rest)`` where ``coeffs`` is indexed by
    the residues of the remaining coordinates ``rest`` (row-major) and the
    last axis holds reduced cyclotomic coefficients.
    """
    w = phi.window
    dset = set(tuple(c) for c in direction)
    axes = tuple(k for k, c in enumerate(w.coords) if c in dset)
    rest = [c for c in w.coords if c not in dset]
    arr, level, ps = phi.dense()
    arr = _widen(arr, _max_abs(arr) * w.q ** len(axes))
    A = arr.reshape((w.q,) * w.dim + (arr.shape[1],))
    S = A.sum(axis=axes) if axes else A
    return S, level, ps - w.b * len(axes), rest


def _pairing_integral(phi: SchwartzFunction, coords: Sequence[Coord], X: ScaledMatrix) -> Cyclotomic:
    """Integral over the subspace ``coords`` of Y -> phi(Y) psi(tr(XY))."""
    w = phi.window
    p, d = w.p, w.depth
    zero = Cyclotomic.zero(p)
    cset = set(coords)
    dual_pos = [(j, i) for i, j in coords]
    for i, j in dual_pos:
        v = X.entry_valuation(i, j)
        if v is not None and v < -w.b:
            return zero
    if X.abs_prec < -w.a:
        raise PrecisionError(f"pairing point known modulo p^{X.abs_prec}, need p^{-w.a}")
    xs = _residues_at(X, dual_pos, -w.b, d)
    idx = [w.coords.index(c) for c in coords]
    off = [k for k, c in enumerate(w.coords) if c not in cset]
    ps = min((v.pscale for v in phi.values.values()), default=0)
    level = max(d, phi.level)
    Q = p**level
    step = p ** (level - d)
    acc = [0] * Q
    for key, v in phi.values.items():
        if any(key[k] for k in off):
            continue
        e = sum(key[k] * x for k, x in zip(idx, xs)) * step
        for k, c in enumerate(v.group_ring(level, ps)):
            if c:
                acc[(e + k) % Q] += c
    return Cyclotomic.from_group_ring(p, level, acc, ps).rescale(-w.b * len(coords))


def parabolic_descent_identity(phi: SchwartzFunction, P, X: ScaledMatrix,
                               phi_hat: SchwartzFunction | None = None) -> tuple[Cyclotomic, Cyclotomic, bool]:
    """Both sides of: integral over n of phi_hat(X + N) = integral over p of phi(Y) psi(tr(XY)).

    ``P`` is any object with ``parabolic_coords`` and ``nilradical_coords``.
    With the self-dual normalization the two sides agree with no constant.
    """
    if phi_hat is None:
        phi_hat = fourier_separable(phi)
    lhs = integrate_affine_slice(phi_hat, P.nilradical_coords, X)
    rhs = _pairing_integral(phi, P.parabolic_coords, X)
    return lhs, rhs, lhs == rhs


# ---------------------------------------------------------------------------
# Lie-algebra cusp verification


@dataclass
class LieCuspReport:
    passed: bool
    points_checked: int
    per_parabolic: list[dict] = field(default_factory=list)
    outside_checked: int = 0
    conjugated_checked: int = 0

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "points_checked": self.points_checked,
            "per_parabolic": self.per_parabolic,
            "outside_checked": self.outside_checked,
            "conjugated_checked": self.conjugated_checked,
        }


def _matrix_json(X: ScaledMatrix) -> dict:
    return {"scale": X.scale, "prec": X.prec, "entries": [list(r) for r in X.entries]}


def _check_fibres(phi: SchwartzFunction, P, label: str) -> dict:
    w = phi.window
    S, level, ps, rest = fibre_integrals(phi, P.nilradical_coords)
    flat = S.reshape(-1, S.shape[-1])
    nz = np.flatnonzero(np.any(flat != 0, axis=1))
    if nz.size:
        i = int(nz[0])
        digits = np.unravel_index(i, S.shape[:-1]) if rest else ()
        rows = [[0] * w.n for _ in range(w.n)]
        for c, r in zip(rest, digits):
            rows[c[0]][c[1]] = int(r)
        X = ScaledMatrix(w.p, w.a, w.depth, tuple(map(tuple, rows)))
        value = Cyclotomic(w.p, level, ps, tuple(int(x) for x in flat[i]))
        raise CuspViolation(
            f"nonzero cusp integral along {label} at X={X.entries} (scale {w.a}): {value}",
            {"parabolic": label, "X": _matrix_json(X), "value": value.to_json(),
             "abs": abs(value.to_complex())},
        )
    return {"fibres": int(flat.shape[0]), "nonzero": 0, "max_abs": 0.0}


def lie_cusp_verify(phi: SchwartzFunction, parabolics: Sequence, outside_samples: int = 50,
                    conjugations: int = 0, seed: int = 0) -> LieCuspReport:
    """Check that every unipotent slice integral of ``phi`` vanishes exactly.

    For each parabolic the integral over n at X depends only on X modulo n,
    and vanishes identically unless X lies in p^a L; every such class is
    checked, which covers all X of the window.  ``outside_samples`` random
    base points outside the window are integrated directly, and
    ``conjugations`` random GL_n(Z_p)-conjugates of random standard
    parabolics are checked through the conjugated function.

    Raises CuspViolation with the first witness (in row-major order).
    """
    w = phi.window
    if not w.is_full:
        raise ValueError("cusp verification needs a function on all of gl_n")
    rng = np.random.default_rng(seed)
    report = LieCuspReport(passed=False, points_checked=0)
    for P in parabolics:
        label = "-".join(map(str, P.composition))
        entry = {"composition": list(P.composition), "points_checked": w.size}
        entry.update(_check_fibres(phi, P, label))
        outside = 0
        for _ in range(outside_samples):
            X = _outside_point(w, rng)
            val = integrate_affine_slice(phi, P.nilradical_coords, X)
            if not val.is_zero():
                raise CuspViolation(
                    f"nonzero cusp integral along {label} at outside point {X.entries}",
                    {"parabolic": label, "X": _matrix_json(X), "value": val.to_json(), "abs": abs(val.to_complex())},
                )
            outside += 1
        entry["outside_checked"] = outside
        report.per_parabolic.append(entry)
        report.points_checked += w.size
        report.outside_checked += outside
    if conjugations and parabolics:
        from .gln import conjugate_function, random_gl

        for t in range(conjugations):
            g = random_gl(w.p, w.n, max(w.depth, 1), rng)
            P = parabolics[int(rng.integers(len(parabolics)))]
            label = "-".join(map(str, P.composition)) + f"^g{t}"
            # integral over g n g^-1 of phi(X + .) = integral over n of (g^-1 . phi)(g^-1 X g + .)
            _check_fibres(conjugate_function(phi, _inverse(g)), P, label)
            report.conjugated_checked += 1
    report.passed = True
    return report


def _inverse(g: ScaledMatrix) -> ScaledMatrix:
    from .padic import mat_inv_mod

    return ScaledMatrix(g.p, 0, g.prec, tuple(map(tuple, mat_inv_mod(g.entries, g.p, g.prec))))


def _outside_point(w: LatticeWindow, rng: np.random.Generator) -> ScaledMatrix:
    """Random point of p^(a-2) L known modulo p^b with some entry of valuation < a."""
    p, n = w.p, w.n
    depth = w.b - (w.a - 2)
    m = p**depth
    while True:
        rows = [[int(x) for x in rng.integers(0, m, size=n)] for _ in range(n)]
        X = ScaledMatrix(p, w.a - 2, depth, tuple(map(tuple, rows)))
        if any((v := X.entry_valuation(i, j)) is not None and v < w.a for i in range(n) for j in range(n)):
            return X
