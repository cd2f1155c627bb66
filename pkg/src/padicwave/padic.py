"""Exact arithmetic on the p-adic rationals k/p^n.

Every point the wavelet machinery touches is a rational whose denominator is
a power of p, so plain :class:`fractions.Fraction` values carry all the
information we need.  :class:`PAdicRational` is the canonical non-negative
form used for translation parameters; the free functions accept ints,
Fractions or PAdicRationals interchangeably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union


class InvalidInput(ValueError):
    """Raised for arguments outside an operation's domain."""


class OutOfSupport(ValueError):
    """Raised when a point lies outside the ball an index is defined on."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise InvalidInput(f"p must be a prime integer, got {p!r}")
    return p


@dataclass(frozen=True)
class PAdicRational:
    """Non-negative rational ``num / prime**exp`` kept in canonical form."""

    prime: int
    num: int
    exp: int = 0

    def __post_init__(self):
        check_prime(self.prime)
        if self.num < 0 or self.exp < 0:
            raise InvalidInput("PAdicRational holds non-negative k/p^n only")
        num, exp = self.num, self.exp
        if num == 0:
            exp = 0
        while exp > 0 and num % self.prime == 0:
            num //= self.prime
            exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    @classmethod
    def from_value(cls, p: int, x: "Point") -> "PAdicRational":
        q = as_fraction(x, p)
        if q < 0:
            raise InvalidInput(f"{q} is negative; use frac_part for signed input")
        return cls(p, q.numerator * (p ** denominator_exponent(q, p)) // q.denominator,
                   denominator_exponent(q, p))

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.prime ** self.exp)

    def norm(self) -> Fraction:
        return padic_norm(self.value, self.prime)

    def frac(self) -> "PAdicRational":
        return frac_part(self.value, self.prime)

    def digits(self) -> "DigitExpansion":
        return digit_expansion(self.value, self.prime)

    def __str__(self):
        return str(self.value)


Point = Union[int, Fraction, PAdicRational]


def as_fraction(x: Point, p: int | None = None) -> Fraction:
    if isinstance(x, PAdicRational):
        if p is not None and x.prime != p:
            raise InvalidInput(f"mixed primes {x.prime} and {p}")
        return x.value
    q = Fraction(x)
    if p is not None:
        denominator_exponent(q, p)
    return q


def denominator_exponent(q: Fraction, p: int) -> int:
    """Return n with ``q.denominator == p**n``; reject other denominators."""
    d, n = q.denominator, 0
    while d % p == 0:
        d //= p
        n += 1
    if d != 1:
        raise InvalidInput(f"denominator of {q} is not a power of {p}")
    return n


def valuation(x: Point, p: int) -> int | None:
    """p-adic valuation gamma, or None for zero."""
    q = as_fraction(x, p)
    if q == 0:
        return None
    num, v = abs(q.numerator), 0
    while num % p == 0:
        num //= p
        v += 1
    return v - denominator_exponent(q, p)


def norm_exponent(x: Point, p: int) -> int | None:
    """log_p |x|_p, or None for zero."""
    v = valuation(x, p)
    return None if v is None else -v


def padic_norm(x: Point, p: int) -> Fraction:
    v = valuation(x, p)
    if v is None:
        return Fraction(0)
    return Fraction(1, p ** v) if v >= 0 else Fraction(p ** -v)


@dataclass(frozen=True)
class DigitExpansion:
    """Finite expansion x = sum_j digits[j - first_index] * p**j."""

    prime: int
    first_index: int
    digits: tuple[int, ...]

    def value(self) -> Fraction:
        return sum((Fraction(d) * Fraction(self.prime) ** (self.first_index + i)
                    for i, d in enumerate(self.digits)), Fraction(0))


def digit_expansion(x: Point, p: int) -> DigitExpansion:
    q = as_fraction(x, p)
    if q < 0:
        raise InvalidInput("finite digit expansions exist for non-negative values only")
    if q == 0:
        return DigitExpansion(p, 0, ())
    n = denominator_exponent(q, p)
    k = q.numerator * p ** n // q.denominator
    digits = []
    while k:
        k, d = divmod(k, p)
        digits.append(d)
    gamma = -n
    while digits[0] == 0:
        digits.pop(0)
        gamma += 1
    return DigitExpansion(p, gamma, tuple(digits))


def frac_fraction(x: Point, p: int) -> Fraction:
    """{x}_p as a Fraction in [0, 1); works for signed input."""
    q = as_fraction(x, p)
    n = denominator_exponent(q, p)
    den = p ** n
    return Fraction((q.numerator * (den // q.denominator)) % den, den)


def frac_part(x: Point, p: int) -> PAdicRational:
    return PAdicRational.from_value(p, frac_fraction(x, p))


@lru_cache(maxsize=4096)
def unit_root(k: int, n: int) -> complex:
    """exp(2*pi*i*k/n) evaluated from the reduced angle k/n."""
    k %= n
    g = math.gcd(k, n)
    k, n = k // g, n // g
    if n == 1:
        return 1 + 0j
    if n == 2:
        return -1 + 0j
    if n == 4:
        return 1j if k == 1 else -1j
    # fold into (-1/2, 1/2] so the angle passed to cos/sin stays small
    if 2 * k > n:
        k -= n
    angle = 2 * math.pi * k / n
    return complex(math.cos(angle), math.sin(angle))


def character(x: Point, p: int) -> complex:
    """The additive character chi_p(x) = exp(2 pi i {x}_p)."""
    f = frac_fraction(x, p)
    return unit_root(f.numerator, f.denominator)


def coset_index(x: Point, m: int, M: int, p: int) -> int:
    """Index v in [0, p^(M+m)) of the coset x + p^m Z_p inside p^-M Z_p."""
    if m + M < 0:
        raise InvalidInput(f"need m + M >= 0, got m={m}, M={M}")
    q = as_fraction(x, p)
    e = norm_exponent(q, p)
    if e is not None and e > M:
        raise OutOfSupport(f"|{q}|_p = p^{e} exceeds p^{M}")
    scaled = q * Fraction(p) ** M
    assert scaled.denominator == 1
    return scaled.numerator % p ** (M + m)


def index_to_rep(v: int, m: int, M: int, p: int) -> PAdicRational:
    if m + M < 0 or not 0 <= v < p ** (m + M):
        raise InvalidInput(f"index {v} outside [0, p^{m + M})")
    return PAdicRational.from_value(p, Fraction(v) / Fraction(p) ** M)


def I_p_in_ball(center: Point, radius_exp: int, p: int) -> list[Fraction]:
    """All b in I_p with |b - center|_p <= p^radius_exp, in increasing order."""
    w = as_fraction(center, p)
    if radius_exp <= 0:
        b = frac_fraction(w, p)
        e = norm_exponent(b - w, p)
        return [b] if e is None or e <= radius_exp else []
    step = Fraction(1, p ** radius_exp)
    return sorted({frac_fraction(w + s * step, p) for s in range(p ** radius_exp)})
