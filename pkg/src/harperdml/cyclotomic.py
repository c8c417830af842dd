"""Exact arithmetic in the cyclotomic fields Q(zeta_n).

Elements are coefficient vectors in the power basis 1, zeta, ..., zeta^(h-1),
h = phi(n), reduced modulo the n-th cyclotomic polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

import mpmath
import numpy as np


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num, rem = _divmod_poly(num, list(cyclotomic_poly(d)))
            assert not any(rem)
    return tuple(int(c) for c in num)


def totient(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _divmod_poly(num: Sequence, den: Sequence):
    """Polynomial division over Q (exact for monic integer divisors)."""
    num = [Fraction(c) for c in num]
    den = _trim([Fraction(c) for c in den])
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    num = _trim(num)
    if len(num) < len(den):
        return [Fraction(0)], num
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(q) - 1, -1, -1):
        c = num[k + len(den) - 1] / lead
        q[k] = c
        if c:
            for j, dj in enumerate(den):
                num[k + j] -= c * dj
    return q, _trim(num[: len(den) - 1])


@lru_cache(maxsize=None)
def _power_table(n: int, top: int) -> tuple:
    """zeta^k in the power basis for k < top, as integer tuples."""
    phi = cyclotomic_poly(n)
    h = len(phi) - 1
    rows = []
    cur = [0] * h
    cur[0] = 1
    for _ in range(top):
        rows.append(tuple(cur))
        # multiply by x and reduce with x^h = -sum phi_i x^i
        carry = cur[-1]
        cur = [0] + cur[:-1]
        if carry:
            cur = [c - carry * p for c, p in zip(cur, phi[:h])]
    return tuple(rows)


def cyclotomic_reduce(coeffs: Sequence, n: int) -> "CyclotomicNumber":
    h = totient(n)
    table = _power_table(n, max(len(coeffs), h))
    out = [Fraction(0)] * h
    for k, c in enumerate(coeffs):
        if c:
            c = Fraction(c)
            for j, t in enumerate(table[k]):
                if t:
                    out[j] += c * t
    return CyclotomicNumber(n, tuple(out))


@dataclass(frozen=True)
class CyclotomicNumber:
    n: int
    coeffs: tuple  # Fractions, length phi(n)

    @classmethod
    def rational(cls, x, n: int = 1) -> "CyclotomicNumber":
        h = totient(n)
        return cls(n, (Fraction(x),) + (Fraction(0),) * (h - 1))

    @classmethod
    def root_of_unity(cls, n: int, k: int) -> "CyclotomicNumber":
        """zeta_n^k."""
        c = [0] * (k % n + 1)
        c[k % n] = 1
        return cyclotomic_reduce(c, n)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def _coerce(self, other):
        if isinstance(other, CyclotomicNumber):
            if other.n == self.n:
                return self, other
            m = self.n * other.n // gcd(self.n, other.n)
            return self.lift(m), other.lift(m)
        return self, CyclotomicNumber.rational(other, self.n)

    def __add__(self, other):
        a, b = self._coerce(other)
        return CyclotomicNumber(a.n, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.n, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-other if isinstance(other, CyclotomicNumber) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CyclotomicNumber):
            f = Fraction(other)
            return CyclotomicNumber(self.n, tuple(x * f for x in self.coeffs))
        a, b = self._coerce(other)
        prod = [Fraction(0)] * (2 * a.degree - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return cyclotomic_reduce(prod, a.n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = CyclotomicNumber.rational(1, self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, CyclotomicNumber):
            try:
                other = CyclotomicNumber.rational(other, self.n)
            except (TypeError, ValueError):
                return NotImplemented
        a, b = self._coerce(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def denominator(self) -> int:
        out = 1
        for c in self.coeffs:
            out = out * c.denominator // gcd(out, c.denominator)
        return out

    def lift(self, m: int) -> "CyclotomicNumber":
        """The same element viewed in Q(zeta_m), n | m."""
        if m % self.n:
            raise ValueError(f"Q(zeta_{self.n}) is not a subfield of Q(zeta_{m})")
        step = m // self.n
        c = [Fraction(0)] * (step * (self.degree - 1) + 1)
        for i, x in enumerate(self.coeffs):
            c[i * step] = x
        return cyclotomic_reduce(c, m)

    def conj(self) -> "CyclotomicNumber":
        """Complex conjugation zeta -> zeta^-1."""
        c = [Fraction(0)] * self.n
        for i, x in enumerate(self.coeffs):
            c[(-i) % self.n] += x
        return cyclotomic_reduce(c, self.n)

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def embeddings(self, dps: int = 40) -> list:
        return embeddings_eval(self, dps)

    def __complex__(self):
        return complex(embeddings_eval(self)[0])

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*z^{i}")
        return f"Cyc{self.n}({' + '.join(terms) or '0'})"


def embeddings_eval(x: CyclotomicNumber, dps: int = 40) -> list:
    """Values under zeta -> exp(2 pi i k / n), k coprime to n, ascending k."""
    out = []
    with mpmath.workdps(dps):
        for k in range(1, x.n + 1):
            if gcd(k, x.n) != 1:
                continue
            z = mpmath.expjpi(mpmath.mpf(2 * k) / x.n)
            acc = mpmath.mpc(0)
            for c in reversed(x.coeffs):
                acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            out.append(acc)
    return out


def resultant(a: Sequence, b: Sequence) -> Fraction:
    """Resultant of two polynomials over Q (coefficients lowest first)."""
    a = _trim([Fraction(c) for c in a])
    b = _trim([Fraction(c) for c in b])
    if not a or not b:
        return Fraction(0)
    sign = 1
    acc = Fraction(1)
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            return sign * acc * b[0] ** da
        _, r = _divmod_poly(a, b)
        if not r:
            return Fraction(0)
        dr = len(r) - 1
        if (da * db) % 2:
            sign = -sign
        acc *= b[-1] ** (da - dr)
        a, b = b, r


def field_norm(x: CyclotomicNumber) -> Fraction:
    """N(x) = prod of embeddings = Res(Phi_n, x(t)) since Phi_n is monic."""
    if x.is_zero():
        return Fraction(0)
    return resultant(list(cyclotomic_poly(x.n)), list(x.coeffs))


class PreconditionViolated(ValueError):
    pass


def conjugate_bound_check(x: CyclotomicNumber, R: float) -> bool:
    """Check min |e_i(x)| >= R^(1-h) for a nonzero algebraic integer x with |e_i(x)| <= R."""
    if x.is_zero() or not x.is_integral():
        raise PreconditionViolated("x must be a nonzero element of Z[zeta_n]")
    mods = [abs(v) for v in embeddings_eval(x)]
    if max(mods) > R * (1 + 1e-15):
        raise PreconditionViolated(f"an embedding has modulus {float(max(mods))} > R={R}")
    h = x.degree
    return float(min(mods)) >= float(R) ** (1 - h) - 1e-15


# --- matrices over Z[zeta_n] -------------------------------------------------


@dataclass(frozen=True)
class CycloMatrix:
    """Square matrix sum_i parts[i] * zeta^i with integer (object) arrays."""

    n: int
    parts: np.ndarray  # shape (h, N, N), dtype object (python ints)

    @property
    def size(self) -> int:
        return self.parts.shape[1]

    @property
    def h(self) -> int:
        return self.parts.shape[0]

    def entry(self, i: int, j: int) -> CyclotomicNumber:
        return CyclotomicNumber(self.n, tuple(Fraction(int(p)) for p in self.parts[:, i, j]))

    def __matmul__(self, other: "CycloMatrix") -> "CycloMatrix":
        h = self.h
        raw = [None] * (2 * h - 1)
        for i in range(h):
            A = self.parts[i]
            if not A.any():
                continue
            for j in range(h):
                B = other.parts[j]
                if not B.any():
                    continue
                P = A.dot(B)
                raw[i + j] = P if raw[i + j] is None else raw[i + j] + P
        return CycloMatrix(self.n, _reduce_parts(raw, self.n, self.size))

    def trace(self) -> CyclotomicNumber:
        return CyclotomicNumber(self.n, tuple(Fraction(int(np.trace(p))) for p in self.parts))

    def to_complex(self) -> np.ndarray:
        z = np.exp(2j * np.pi / self.n)
        return sum(self.parts[i].astype(float) * z**i for i in range(self.h))


def _reduce_parts(raw: list, n: int, size: int) -> np.ndarray:
    h = totient(n)
    table = _power_table(n, len(raw))
    out = np.zeros((h, size, size), dtype=object)
    out[...] = 0
    for k, P in enumerate(raw):
        if P is None:
            continue
        for j, t in enumerate(table[k]):
            if t:
                out[j] = out[j] + t * P
    return out


def identity_cyclo(n: int, size: int) -> CycloMatrix:
    parts = np.zeros((totient(n), size, size), dtype=object)
    parts[...] = 0
    for i in range(size):
        parts[0, i, i] = 1
    return CycloMatrix(n, parts)


def charpoly_integral(M: CycloMatrix) -> list:
    """Characteristic polynomial det(t - M), coefficients highest degree first.

    Faddeev-LeVerrier recurrence; every intermediate lies in Z[zeta_n], so
    the division by k is exact integer division.
    """
    N = M.size
    h = M.h
    coeffs = [CyclotomicNumber.rational(1, M.n)]
    cur = identity_cyclo(M.n, N)
    for k in range(1, N + 1):
        AM = M @ cur
        tr = [int(np.trace(p)) for p in AM.parts]
        if any(t % k for t in tr):
            raise ArithmeticError("non-integral Faddeev-LeVerrier step; matrix is not over Z[zeta]")
        ck = [-t // k for t in tr]
        coeffs.append(CyclotomicNumber(M.n, tuple(Fraction(c) for c in ck)))
        if k < N:
            parts = AM.parts.copy()
            for i in range(N):
                for j in range(h):
                    parts[j, i, i] = parts[j, i, i] + ck[j]
            cur = CycloMatrix(M.n, parts)
    return coeffs


def taylor_shift(coeffs_high_first: list, lam: CyclotomicNumber) -> list:
    """Coefficients of p(t + lam), highest degree first."""
    c = list(coeffs_high_first)
    N = len(c) - 1
    # repeated synthetic division (Horner shift)
    for i in range(N):
        for j in range(1, N - i + 1):
            c[j] = c[j] + lam * c[j - 1]
    return c
