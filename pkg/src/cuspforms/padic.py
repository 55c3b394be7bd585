"""Fixed-precision arithmetic over Z_p and M_n(Z_p).

Every quantity is stored as ``p**scale * residue`` where ``residue`` is an
integer known modulo ``p**prec``.  The *absolute* precision of such a value
is ``scale + prec``: the value is determined modulo ``p**(scale + prec)``.

Matrices follow the same convention with a common scale for all entries.
Nothing here ever divides by an integer that is divisible by ``p``; the
series for ``exp`` and ``log`` split each factorial or index into its
``p``-part (absorbed by the valuation of the argument) and a unit (inverted
modulo the working modulus).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceViolation, PrecisionError

IntMatrix = list[list[int]]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def vp(x: int, p: int) -> int | None:
    """p-adic valuation of an integer; ``None`` for zero."""
    if x == 0:
        return None
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def vp_factorial(k: int, p: int) -> int:
    """Legendre's formula for v_p(k!)."""
    v, q = 0, p
    while q <= k:
        v += k // q
        q *= p
    return v


@dataclass(frozen=True)
class PrimeContext:
    p: int
    W: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.W < 1:
            raise ValueError("working exponent W must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p**self.W


@dataclass(frozen=True)
class AtLeast:
    """Valuation lower bound reported when precision runs out."""

    bound: int

    def __str__(self):
        return f">= {self.bound}"


# ---------------------------------------------------------------------------
# scalars


@dataclass(frozen=True)
class ScaledResidue:
    """The p-adic number ``p**scale * residue`` known modulo ``p**(scale+prec)``."""

    p: int
    scale: int
    residue: int
    prec: int

    def __post_init__(self):
        if self.prec < 0:
            raise ValueError("negative precision")
        r = self.residue % self.p**self.prec
        s, d = self.scale, self.prec
        while r and r % self.p == 0:
            r //= self.p
            s += 1
            d -= 1
        object.__setattr__(self, "residue", r)
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "prec", d)

    @classmethod
    def from_int(cls, p: int, x: int, prec: int) -> ScaledResidue:
        return cls(p, 0, x, prec)

    @property
    def abs_prec(self) -> int:
        return self.scale + self.prec

    def valuation(self) -> int | AtLeast:
        if self.residue == 0:
            return AtLeast(self.abs_prec)
        return self.scale

    def unit_part(self) -> int:
        """Unit ``u`` with value ``p**scale * u``, modulo ``p**prec``."""
        if self.residue == 0:
            raise PrecisionError("zero residue has no unit part")
        return self.residue

    def is_zero(self) -> bool:
        return self.residue == 0

    def __str__(self):
        if self.residue == 0:
            return f"O({self.p}^{self.abs_prec})"
        return f"{self.p}^{self.scale}*{self.residue} + O({self.p}^{self.abs_prec})"


# ---------------------------------------------------------------------------
# integer matrix helpers (lists of Python ints, reduced modulo m when given)


def mat_identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], m: int | None = None) -> IntMatrix:
    n, k, l = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(l):
            s = 0
            for t in range(k):
                s += Ai[t] * B[t][j]
            row.append(s % m if m else s)
        out.append(row)
    return out


def mat_add(A, B, m: int | None = None) -> IntMatrix:
    if m:
        return [[(a + b) % m for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B, m: int | None = None) -> IntMatrix:
    if m:
        return [[(a - b) % m for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, c: int, m: int | None = None) -> IntMatrix:
    if m:
        return [[(c * a) % m for a in r] for r in A]
    return [[c * a for a in r] for r in A]


def mat_inv_mod(A: Sequence[Sequence[int]], p: int, k: int) -> IntMatrix:
    """Inverse modulo ``p**k`` by Gauss-Jordan with unit pivots."""
    m = p**k
    n = len(A)
    M = [[x % m for x in row] + [int(i == j) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] % p), None)
        if piv is None:
            raise ValueError("matrix is not invertible modulo p")
        M[col], M[piv] = M[piv], M[col]
        inv = pow(M[col][col], -1, m)
        M[col] = [(x * inv) % m for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [(x - f * y) % m for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def det_mod(A: Sequence[Sequence[int]], m: int) -> int:
    """Determinant by the constant term of the division-free char poly."""
    coeffs = _berkowitz(A, m)
    n = len(A)
    return (coeffs[0] * (-1) ** n) % m


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True, eq=False)
class ScaledMatrix:
    """``p**scale * M`` with ``M`` an integer matrix known modulo ``p**prec``."""

    p: int
    scale: int
    prec: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.prec < 0:
            raise ValueError("negative precision")
        m = self.p**self.prec
        rows = tuple(tuple(int(x) % m for x in row) for row in self.entries)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_integers(cls, p: int, rows: Iterable[Iterable[int]], scale: int = 0, prec: int = 8) -> ScaledMatrix:
        return cls(p, scale, prec, tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, p: int, n: int, prec: int) -> ScaledMatrix:
        return cls(p, 0, prec, tuple(map(tuple, mat_identity(n))))

    @classmethod
    def zero(cls, p: int, n: int, scale: int = 0, prec: int = 0) -> ScaledMatrix:
        return cls(p, scale, prec, tuple((0,) * n for _ in range(n)))

    @classmethod
    def elementary(cls, p: int, n: int, i: int, j: int, scale: int = 0, prec: int = 8) -> ScaledMatrix:
        rows = [[0] * n for _ in range(n)]
        rows[i][j] = 1
        return cls.from_integers(p, rows, scale, prec)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def abs_prec(self) -> int:
        return self.scale + self.prec

    @property
    def modulus(self) -> int:
        return self.p**self.prec

    def lift(self) -> IntMatrix:
        return [list(r) for r in self.entries]

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.entries)

    def entry_valuation(self, i: int, j: int) -> int | None:
        v = vp(self.entries[i][j], self.p)
        return None if v is None else v + self.scale

    def normalized(self) -> ScaledMatrix:
        """Same value with the common power of p moved into ``scale``."""
        if self.is_zero():
            return ScaledMatrix(self.p, self.abs_prec, 0, self.entries)
        g = reduce(lambda x, y: min(x, y), (vp(x, self.p) for r in self.entries for x in r if x))
        if g == 0:
            return self
        q = self.p**g
        rows = tuple(tuple(x // q for x in r) for r in self.entries)
        return ScaledMatrix(self.p, self.scale + g, self.prec - g, rows)

    def rescaled(self, scale: int) -> ScaledMatrix:
        """Re-express with the given (smaller or equal valuation) scale."""
        X = self.normalized()
        if X.is_zero():
            return ScaledMatrix(self.p, scale, max(self.abs_prec - scale, 0), X.entries)
        if scale > X.scale:
            raise PrecisionError(f"entries have valuation {X.scale} < requested scale {scale}")
        q = self.p ** (X.scale - scale)
        return ScaledMatrix(self.p, scale, X.prec + X.scale - scale, tuple(tuple(x * q for x in r) for r in X.entries))

    def with_abs_prec(self, abs_prec: int) -> ScaledMatrix:
        """Drop precision down to ``abs_prec`` (never increases it)."""
        if abs_prec > self.abs_prec:
            raise PrecisionError("cannot increase precision")
        return ScaledMatrix(self.p, self.scale, max(abs_prec - self.scale, 0), self.entries)

    def _align(self, other: ScaledMatrix) -> tuple[int, int, IntMatrix, IntMatrix]:
        if self.p != other.p or self.n != other.n:
            raise ValueError("incompatible matrices")
        s = min(self.scale, other.scale)
        A = min(self.abs_prec, other.abs_prec)
        qa, qb = self.p ** (self.scale - s), self.p ** (other.scale - s)
        return s, A, mat_scale(self.entries, qa), mat_scale(other.entries, qb)

    def __add__(self, other: ScaledMatrix) -> ScaledMatrix:
        s, A, a, b = self._align(other)
        return ScaledMatrix(self.p, s, max(A - s, 0), tuple(map(tuple, mat_add(a, b))))

    def __sub__(self, other: ScaledMatrix) -> ScaledMatrix:
        s, A, a, b = self._align(other)
        return ScaledMatrix(self.p, s, max(A - s, 0), tuple(map(tuple, mat_sub(a, b))))

    def __neg__(self) -> ScaledMatrix:
        return ScaledMatrix(self.p, self.scale, self.prec, tuple(tuple(-x for x in r) for r in self.entries))

    def __matmul__(self, other: ScaledMatrix) -> ScaledMatrix:
        a, b = self.normalized(), other.normalized()
        d = min(a.prec, b.prec)
        return ScaledMatrix(self.p, a.scale + b.scale, d, tuple(map(tuple, mat_mul(a.entries, b.entries, self.p**d if d else 1))))

    def times_scalar(self, c: int) -> ScaledMatrix:
        return ScaledMatrix(self.p, self.scale, self.prec, tuple(map(tuple, mat_scale(self.entries, c))))

    def shift(self, k: int) -> ScaledMatrix:
        """Multiply by ``p**k``."""
        return ScaledMatrix(self.p, self.scale + k, self.prec, self.entries)

    def trace(self) -> ScaledResidue:
        return ScaledResidue(self.p, self.scale, sum(self.entries[i][i] for i in range(self.n)), self.prec)

    def __eq__(self, other):
        if not isinstance(other, ScaledMatrix):
            return NotImplemented
        if self.p != other.p or self.n != other.n or self.abs_prec != other.abs_prec:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        X = self.normalized()
        return hash((X.p, X.scale, X.prec, X.entries))

    def __repr__(self):
        return f"ScaledMatrix(p={self.p}, scale={self.scale}, prec={self.prec}, entries={self.entries})"


def lattice_valuation(X: ScaledMatrix) -> int | AtLeast:
    """Largest k with X in p**k M_n(Z_p); ``AtLeast`` when every residue is zero."""
    vals = [vp(x, X.p) for r in X.entries for x in r if x]
    if not vals:
        return AtLeast(X.abs_prec)
    return X.scale + min(vals)


# ---------------------------------------------------------------------------
# characteristic polynomials and residue-field irreducibility


@dataclass(frozen=True)
class ResiduePolynomial:
    """Polynomial with coefficients modulo ``p**prec``, lowest degree first."""

    p: int
    prec: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        m = self.p**self.prec
        c = [int(x) % m for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def mod_p(self) -> ResiduePolynomial:
        return ResiduePolynomial(self.p, 1, self.coeffs)

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mon = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if c == 1 and k:
                terms.append(mon)
            else:
                terms.append(f"{c}{'*' if mon else ''}{mon}")
        return " + ".join(terms) or "0"


def _berkowitz(A: Sequence[Sequence[int]], m: int) -> list[int]:
    """Coefficients of det(xI - A) mod m, lowest degree first, no divisions.

    Peels the matrix from the bottom-right corner: with A = [[a, R], [C, A1]]
    the char poly of A is a lower-triangular Toeplitz matrix with first column
    (1, -a, -RC, -RA1C, ...) applied to the char poly of A1.
    """
    n = len(A)
    poly = [1]  # highest degree first while building
    for k in range(n - 1, -1, -1):
        size = n - k - 1
        R = [A[k][j] for j in range(k + 1, n)]
        v = [A[i][k] for i in range(k + 1, n)]
        col = [1, -A[k][k] % m]
        for _ in range(size):
            col.append(-sum(r * x for r, x in zip(R, v)) % m)
            v = [sum(A[k + 1 + i][k + 1 + j] * v[j] for j in range(size)) % m for i in range(size)]
        poly = [sum(col[i - j] * poly[j] for j in range(min(i, size) + 1)) % m for i in range(size + 2)]
    return poly[::-1]


def charpoly_division_free(M: ScaledMatrix) -> ResiduePolynomial:
    """Characteristic polynomial of ``M`` exact modulo ``p**prec``.

    The scale of ``M`` is ignored: the polynomial is that of the residue
    matrix, so callers wanting ``charpoly(p**a M)`` substitute themselves.
    """
    if M.prec < 1:
        raise PrecisionError("need at least one known digit")
    m = M.modulus
    return ResiduePolynomial(M.p, M.prec, tuple(_berkowitz(M.entries, m)))


def _pstrip(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _pmod(f: list[int], g: list[int], p: int) -> list[int]:
    f = _pstrip([x % p for x in f])
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(f) - 1 >= dg and f:
        c = f[-1] * inv % p
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = (f[shift + i] - c * gi) % p
        _pstrip(f)
    return f


def _pmulmod(a: list[int], b: list[int], g: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, g, p)


def _ppowmod(a: list[int], e: int, g: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, g, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, g, p)
        base = _pmulmod(base, base, g, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _pstrip([x % p for x in a]), _pstrip([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def _prime_divisors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def irreducible_over_residue_field(f: ResiduePolynomial) -> bool:
    """Rabin's test over F_p.

    f of degree n is irreducible iff x**(p**n) = x mod f and
    gcd(x**(p**(n/q)) - x, f) = 1 for every prime q dividing n.
    """
    p = f.p
    g = [c % p for c in f.coeffs]
    _pstrip(g)
    n = len(g) - 1
    if n < 1 or g[-1] != 1:
        raise ValueError("expected a monic polynomial of positive degree")
    x = [0, 1]

    def frobenius_power(k: int) -> list[int]:
        h = x
        for _ in range(k):
            h = _ppowmod(h, p, g, p)
        return h

    for q in _prime_divisors(n):
        h = frobenius_power(n // q)
        diff = _pstrip([(a - b) % p for a, b in zip(h + [0] * 2, x + [0] * len(h))])
        if len(_pgcd(g, diff, p)) > 1:
            return False
    h = frobenius_power(n)
    diff = _pstrip([(a - b) % p for a, b in zip(h + [0] * 2, x + [0] * len(h))])
    return not _pmod(diff, g, p)


# ---------------------------------------------------------------------------
# exponential and logarithm


def exp_term_count(v: int, A: int, p: int) -> int:
    """Number of leading terms of sum X^k/k! that matter modulo p**A.

    Term k has valuation >= k*v - v_p(k!) >= k*v - (k-1)/(p-1).  The lower
    bound increases with k once v > 1/(p-1), so the first K with
    K*v - (K-1)/(p-1) >= A, i.e. K*(v*(p-1) - 1) >= A*(p-1) - 1,
    bounds every later term too.  Terms 0..K-1 are summed.
    """
    if v * (p - 1) <= 1:
        raise ConvergenceViolation(f"exp needs valuation > 1/(p-1); got {v} at p={p}")
    K = 1
    while K * (v * (p - 1) - 1) < A * (p - 1) - 1:
        K += 1
    return K


def log_term_count(v: int, A: int, p: int) -> int:
    """Terms k = 1..K-1 of sum (-1)^(k+1) Y^k/k that matter modulo p**A.

    Term k has valuation >= k*v - floor(log_p k), increasing in k for
    v >= 1, p >= 3; K is the first index where this reaches A.
    """
    if v < 1:
        raise ConvergenceViolation(f"log needs g - 1 of valuation >= 1; got {v}")

    def floor_log(k):
        e, q = 0, p
        while q <= k:
            e += 1
            q *= p
        return e

    K = 1
    while K * v - floor_log(K) < A:
        K += 1
    return K


def _series_valuation(X: ScaledMatrix, name: str) -> tuple[ScaledMatrix, int | None]:
    if X.p < 3:
        raise ConvergenceViolation(f"{name} requires p >= 3; use the Id+X chart at p=2")
    v = lattice_valuation(X)
    if isinstance(v, AtLeast):
        if v.bound < 1:
            raise ConvergenceViolation(f"{name}: argument only known to have valuation {v}")
        return X, None
    if v < 1:
        raise ConvergenceViolation(f"{name}: argument has valuation {v} < 1")
    return X.normalized(), v


def exp_truncated(X: ScaledMatrix) -> ScaledMatrix:
    """exp(X) modulo p**A for X in p*M_n(Z_p) known modulo p**A."""
    A = X.abs_prec
    Xn, v = _series_valuation(X, "exp")
    p, n = X.p, X.n
    if v is None:
        return ScaledMatrix.identity(p, n, A)
    m = p**A
    M = Xn.lift()
    K = exp_term_count(v, A, p)
    total = mat_identity(n)
    power = mat_identity(n)  # M^k mod p^A
    unit_fact = 1
    for k in range(1, K):
        power = mat_mul(power, M, m)
        kk = k
        while kk % p == 0:
            kk //= p
        unit_fact = unit_fact * kk % m
        e = v * k - vp_factorial(k, p)
        if e >= A:
            continue
        c = p**e * pow(unit_fact, -1, m) % m
        total = mat_add(total, mat_scale(power, c), m)
    return ScaledMatrix(p, 0, A, tuple(map(tuple, total)))


def log_truncated(g: ScaledMatrix) -> ScaledMatrix:
    """log(g) modulo p**A for g in 1 + p*M_n(Z_p) known modulo p**A."""
    A = g.abs_prec
    one = ScaledMatrix.identity(g.p, g.n, A)
    Y = g - one
    Yn, v = _series_valuation(Y, "log")
    p, n = g.p, g.n
    if v is None:
        return ScaledMatrix.zero(p, n, 0, A)
    m = p**A
    M = Yn.lift()
    K = log_term_count(v, A, p)
    total = [[0] * n for _ in range(n)]
    power = mat_identity(n)
    for k in range(1, K):
        power = mat_mul(power, M, m)
        e = v * k - vp(k, p)
        if e >= A:
            continue
        c = p**e * pow(k // p ** vp(k, p), -1, m) % m
        if k % 2 == 0:
            c = -c
        total = mat_add(total, mat_scale(power, c), m)
    return ScaledMatrix(p, 0, A, tuple(map(tuple, total)))


# raw integer versions for the hot loops of the group verifier


def exp_int(M: IntMatrix, v: int, p: int, A: int) -> IntMatrix:
    """exp(p**v * M) mod p**A for an integer matrix M (v >= 1)."""
    m = p**A
    n = len(M)
    total = mat_identity(n)
    power = mat_identity(n)
    unit_fact = 1
    for k in range(1, exp_term_count(v, A, p)):
        power = mat_mul(power, M, m)
        kk = k
        while kk % p == 0:
            kk //= p
        unit_fact = unit_fact * kk % m
        e = v * k - vp_factorial(k, p)
        if e < A:
            total = mat_add(total, mat_scale(power, p**e * pow(unit_fact, -1, m)), m)
    return total


def log_int(G: IntMatrix, p: int, A: int) -> IntMatrix:
    """log(G) mod p**A for an integer matrix G = 1 mod p, result unscaled."""
    m = p**A
    n = len(G)
    Y = [[(G[i][j] - (i == j)) % m for j in range(n)] for i in range(n)]
    vals = [vp(x, p) for r in Y for x in r if x]
    if not vals:
        return [[0] * n for _ in range(n)]
    v = min(vals)
    if v < 1:
        raise ConvergenceViolation("log argument is not congruent to 1 mod p")
    q = p**v
    M = [[x // q for x in r] for r in Y]
    total = [[0] * n for _ in range(n)]
    power = mat_identity(n)
    for k in range(1, log_term_count(v, A, p)):
        power = mat_mul(power, M, m)
        vk = vp(k, p)
        e = v * k - vk
        if e >= A:
            continue
        c = p**e * pow(k // p**vk, -1, m) % m
        term = mat_scale(power, c, m)
        total = mat_add(total, term, m) if k % 2 else mat_sub(total, term, m)
    return total


def log_batch(G: np.ndarray, p: int, A: int) -> np.ndarray:
    """log(G) mod p**A for a stack of integer matrices, each = 1 mod p.

    Vectorized twin of :func:`log_int`.  Each term Y^k/k is formed modulo
    p^(A+e) with e the largest p-adic valuation of a denominator, so the
    exact division by p^vp(k) leaves the result known modulo p^A.
    """
    G = np.asarray(G)
    n = G.shape[-1]
    K = log_term_count(1, A, p)
    e = max(vp(k, p) for k in range(1, K))
    mod = p ** (A + e)
    dtype = np.int64 if n * mod * mod < 2**62 else object
    eye = np.eye(n, dtype=dtype)
    Y = (G.astype(dtype) - eye) % mod
    if np.any(Y % p):
        raise ConvergenceViolation("log argument is not congruent to 1 mod p")
    total = np.zeros_like(Y)
    power = Y.copy()
    m = p**A
    for k in range(1, K):
        if k > 1:
            power = (power @ Y) % mod
        vk = vp(k, p)
        c = pow(k // p**vk, -1, m)
        term = (power // p**vk) % m * c % m
        total = (total + term) % m if k % 2 else (total - term) % m
    return total
