"""Exact arithmetic in Z[1/p][zeta_{p^m}].

An element is ``p**pscale * sum(coeffs[i] * zeta**i)`` with ``zeta`` a
primitive ``p**level``-th root of unity and ``coeffs`` in the power basis
of length ``phi(p**level)``.  Values are kept in a canonical form:

* the level is the smallest one containing the element,
* the coefficients are not all divisible by ``p`` (the p-power lives in
  ``pscale``),
* zero is ``level=0, pscale=0, coeffs=(0,)``.

Canonical form makes ``==`` and ``hash`` structural, and ``is_zero`` a
coefficient test that a pscale can never hide.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PrecisionError
from .padic import ScaledResidue


def totient(p: int, m: int) -> int:
    return 1 if m == 0 else (p - 1) * p ** (m - 1)


def reduce_group_ring(arr: np.ndarray, p: int, m: int) -> np.ndarray:
    """Reduce coefficients indexed by Z/p^m (last axis) modulo Phi_{p^m}.

    Uses zeta^(phi + t) = -sum_{j<p-1} zeta^(t + j p^(m-1)) for t < p^(m-1).
    """
    if m == 0:
        return arr[..., :1].copy()
    phi = totient(p, m)
    block = p ** (m - 1)
    out = arr[..., :phi].copy()
    top = arr[..., phi:]
    for j in range(p - 1):
        out[..., j * block:(j + 1) * block] -= top
    return out


def _reduce_list(c: list[int], p: int, m: int) -> list[int]:
    if m == 0:
        return [sum(c)]
    phi = totient(p, m)
    block = p ** (m - 1)
    out = c[:phi]
    for t, x in enumerate(c[phi:]):
        if x:
            for j in range(p - 1):
                out[t + j * block] -= x
    return out


@dataclass(frozen=True)
class Cyclotomic:
    p: int
    level: int
    pscale: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        p, m, s = self.p, self.level, self.pscale
        c = [int(x) for x in self.coeffs]
        if len(c) != totient(p, m):
            raise ValueError(f"expected {totient(p, m)} coefficients at level {m}, got {len(c)}")
        if not any(c):
            object.__setattr__(self, "level", 0)
            object.__setattr__(self, "pscale", 0)
            object.__setattr__(self, "coeffs", (0,))
            return
        while m > 0 and not any(x for i, x in enumerate(c) if i % p):
            m -= 1
            c = c[::p][: totient(p, m)]
        while all(x % p == 0 for x in c):
            c = [x // p for x in c]
            s += 1
        object.__setattr__(self, "level", m)
        object.__setattr__(self, "pscale", s)
        object.__setattr__(self, "coeffs", tuple(c))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> Cyclotomic:
        return cls(p, 0, 0, (0,))

    @classmethod
    def integer(cls, p: int, k: int, pscale: int = 0) -> Cyclotomic:
        return cls(p, 0, pscale, (k,))

    @classmethod
    def zeta(cls, p: int, m: int, k: int = 1) -> Cyclotomic:
        """``zeta_{p^m} ** k``."""
        Q = p**m
        c = [0] * Q
        c[k % Q] = 1
        return cls(p, m, 0, tuple(_reduce_list(c, p, m)))

    @classmethod
    def from_group_ring(cls, p: int, m: int, counts: Sequence[int], pscale: int = 0) -> Cyclotomic:
        """Element ``p**pscale * sum(counts[k] * zeta**k)`` for k mod p^m."""
        return cls(p, m, pscale, tuple(_reduce_list(list(counts), p, m)))

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def embed(self, level: int, pscale: int) -> list[int]:
        """Coefficient list at a level >= self.level and pscale <= self.pscale."""
        if level < self.level or pscale > self.pscale:
            raise ValueError("can only embed upwards")
        out = [0] * totient(self.p, level)
        step = self.p ** (level - self.level)
        mult = self.p ** (self.pscale - pscale)
        for i, x in enumerate(self.coeffs):
            out[i * step] = x * mult
        return out

    def group_ring(self, level: int, pscale: int) -> list[int]:
        """Coefficients indexed by Z/p^level (unreduced), for accumulation."""
        c = self.embed(level, pscale)
        return c + [0] * (self.p**level - len(c))

    def _unify(self, other: Cyclotomic) -> tuple[int, int, list[int], list[int]]:
        if other.p != self.p:
            raise ValueError("different primes")
        m = max(self.level, other.level)
        s = min(self.pscale, other.pscale)
        return m, s, self.embed(m, s), other.embed(m, s)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Cyclotomic:
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, int):
            return Cyclotomic.integer(self.p, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        m, s, a, b = self._unify(other)
        return Cyclotomic(self.p, m, s, tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.p, self.level, self.pscale, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return Cyclotomic.zero(self.p)
        m = max(self.level, other.level)
        a = self.embed(m, self.pscale)
        b = other.embed(m, other.pscale)
        Q = self.p**m
        prod = [0] * Q
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[(i + j) % Q] += x * y
        return Cyclotomic(self.p, m, self.pscale + other.pscale, tuple(_reduce_list(prod, self.p, m)))

    __rmul__ = __mul__

    def rescale(self, k: int) -> Cyclotomic:
        """Multiply by ``p**k``."""
        if self.is_zero():
            return self
        return Cyclotomic(self.p, self.level, self.pscale + k, self.coeffs)

    def galois(self, u: int) -> Cyclotomic:
        """Apply zeta -> zeta**u (u prime to p)."""
        if self.level == 0:
            return self
        Q = self.p**self.level
        c = [0] * Q
        for i, x in enumerate(self.coeffs):
            c[(i * u) % Q] += x
        return Cyclotomic.from_group_ring(self.p, self.level, c, self.pscale)

    # -- output -------------------------------------------------------------

    def to_complex(self) -> complex:
        """Approximate complex value under zeta -> exp(2 pi i / p^level).

        For display only; no verification decision reads this number.
        """
        Q = self.p**self.level
        z = sum(x * cmath.exp(2j * cmath.pi * i / Q) for i, x in enumerate(self.coeffs))
        return complex(z) * float(self.p) ** self.pscale

    def to_json(self) -> dict:
        return {"level": self.level, "pscale": self.pscale, "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, p: int, d: dict) -> Cyclotomic:
        return cls(p, int(d["level"]), int(d["pscale"]), tuple(int(x) for x in d["coeffs"]))

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i, x in enumerate(self.coeffs):
            if x:
                terms.append(f"{x}" if i == 0 else f"{x}*z^{i}")
        body = " + ".join(terms)
        tail = f" [z = zeta_{self.p ** self.level}]" if self.level else ""
        return f"{self.p}^{self.pscale}*({body}){tail}" if self.pscale else f"({body}){tail}"


def additive_character(x: ScaledResidue, m: int) -> Cyclotomic:
    """The character of conductor Z_p: x -> zeta_{p^m}^(p^m x mod p^m).

    ``x`` must lie in p^{-m} Z_p and be known modulo Z_p.
    """
    if x.abs_prec < 0:
        raise PrecisionError(f"{x} is not determined modulo Z_p")
    p = x.p
    if x.residue == 0 or x.scale >= 0:
        return Cyclotomic.integer(p, 1)
    if x.scale < -m:
        raise ValueError(f"{x} is not in p^-{m} Z_p")
    return Cyclotomic.zeta(p, m, x.residue * p ** (m + x.scale))
