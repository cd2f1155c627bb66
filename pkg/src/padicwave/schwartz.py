"""Locally constant, compactly supported functions on Q_p.

A :class:`TestFunction` with scale ``m`` and support exponent ``M`` is constant
on the cosets of ``p^m Z_p`` and vanishes outside the ball ``p^-M Z_p``.  Its
values are stored densely, one entry per coset, in the order given by
:func:`padicwave.padic.coset_index`: entry ``v`` is the value at ``v / p^M``.
With that ordering the low digits of ``v`` are the coarse (most negative)
p-adic digits, so refining the scale appends high digits and widening the
support prepends low ones.

All constructors canonicalize: the stored (scale, support) pair is the
smallest one representing the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .padic import (
    InvalidInput,
    Point,
    as_fraction,
    check_prime,
    coset_index,
    denominator_exponent,
    norm_exponent,
    OutOfSupport,
    unit_root,
)

TOL = 1e-9
# relative threshold below which coefficients are treated as exact zeros or
# exact equalities during canonicalization
CANON_TOL = 1e-12

_INT64_SAFE = 2 ** 62


class MixedPrimes(InvalidInput):
    pass


def _canonical(p: int, m: int, M: int, values: np.ndarray):
    vals = np.array(values, dtype=complex).reshape(-1)
    if vals.size != p ** (m + M):
        raise InvalidInput(f"expected {p ** (m + M)} values for scale {m}, support {M}, "
                           f"got {vals.size}")
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    if peak == 0.0 or not np.isfinite(peak):
        if not np.isfinite(peak):
            raise InvalidInput("non-finite coefficient")
        return 0, 0, np.zeros(1, dtype=complex)
    thr = CANON_TOL * peak
    re, im = vals.real.copy(), vals.imag.copy()
    re[np.abs(re) <= thr] = 0.0
    im[np.abs(im) <= thr] = 0.0
    vals = re + 1j * im
    changed = True
    while changed and m + M > 0:
        changed = False
        rows = vals.reshape(p, -1)
        if np.max(np.abs(rows - rows[0])) <= thr:
            vals = rows[0].copy() if np.all(rows == rows[0]) else rows.mean(axis=0)
            m -= 1
            changed = True
            continue
        cols = vals.reshape(-1, p)
        if not np.any(cols[:, 1:]):
            vals = cols[:, 0].copy()
            M -= 1
            changed = True
    return m, M, vals


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A Bruhat-Schwartz function; see the module docstring for the layout."""

    __test__ = False  # keep pytest from collecting this class

    p: int
    scale: int
    support: int
    values: np.ndarray

    def __post_init__(self):
        check_prime(self.p)
        if self.scale + self.support < 0:
            raise InvalidInput("scale + support must be non-negative")
        m, M, vals = _canonical(self.p, self.scale, self.support, self.values)
        vals.setflags(write=False)
        object.__setattr__(self, "scale", m)
        object.__setattr__(self, "support", M)
        object.__setattr__(self, "values", vals)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_coeffs(cls, p: int, scale: int, support: int, coeffs: dict[int, complex]):
        vals = np.zeros(p ** (scale + support), dtype=complex)
        for v, c in coeffs.items():
            if not 0 <= v < vals.size:
                raise InvalidInput(f"index {v} outside [0, {vals.size})")
            vals[v] = c
        return cls(p, scale, support, vals)

    @property
    def coeffs(self) -> dict[int, complex]:
        return {int(v): complex(self.values[v]) for v in np.flatnonzero(self.values)}

    @property
    def size(self) -> int:
        return self.values.size

    def is_zero(self) -> bool:
        return not np.any(self.values)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return linear_combine([1, 1], [self, other])

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return linear_combine([1, -1], [self, other])

    def __neg__(self) -> "TestFunction":
        return TestFunction(self.p, self.scale, self.support, -self.values)

    def __mul__(self, c: complex) -> "TestFunction":
        return TestFunction(self.p, self.scale, self.support, complex(c) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "TestFunction":
        return self * (1 / complex(c))

    def __call__(self, x: Point) -> complex:
        return evaluate(self, x)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def allclose(self, other: "TestFunction", tol: float = TOL) -> bool:
        return distance(self, other) <= tol

    def conj(self) -> "TestFunction":
        return TestFunction(self.p, self.scale, self.support, np.conj(self.values))

    def __repr__(self):
        return (f"TestFunction(p={self.p}, scale={self.scale}, support={self.support}, "
                f"nonzero={np.count_nonzero(self.values)})")


def _snap(vals: np.ndarray, ref: float) -> np.ndarray:
    """Zero the entries that are cancellation residue relative to the inputs' size."""
    thr = CANON_TOL * ref
    re, im = vals.real.copy(), vals.imag.copy()
    re[np.abs(re) <= thr] = 0.0
    im[np.abs(im) <= thr] = 0.0
    return re + 1j * im


def _peak(f: TestFunction) -> float:
    return float(np.max(np.abs(f.values)))


def zero(p: int) -> TestFunction:
    return TestFunction(p, 0, 0, np.zeros(1))


def indicator_Zp(p: int) -> TestFunction:
    """The Haar scaling function phi = 1_{Z_p}."""
    return TestFunction(p, 0, 0, np.ones(1))


def _same_prime(fs: Iterable[TestFunction]) -> int:
    primes = {f.p for f in fs}
    if len(primes) != 1:
        raise MixedPrimes(f"functions over different primes: {sorted(primes)}")
    return primes.pop()


def _mod_array(v: np.ndarray, c1: int, c2: int, Q: int) -> np.ndarray:
    """(v * c1 - c2) mod Q, exact for arbitrarily large Q."""
    if Q * max(int(v.size), 1) < _INT64_SAFE:
        return (v * c1 - c2) % Q
    return np.array([(int(x) * c1 - c2) % Q for x in v], dtype=object)


def pullback(f: TestFunction, m_t: int, M_t: int, j: int = 0, a: Point = 0) -> np.ndarray:
    """Values of ``x -> f(x / p^j - a)`` at the coset representatives of the
    grid (m_t, M_t).

    The grid must be at least as fine as the pulled-back function, i.e.
    ``m_t >= f.scale + j``; the support M_t may be smaller than the true
    support, which simply restricts the function to that ball.
    """
    p, m, M = f.p, f.scale, f.support
    if m_t + M_t < 0:
        raise InvalidInput("target grid needs m + M >= 0")
    n_t = m_t + M_t
    if f.is_zero():
        return np.zeros(p ** n_t, dtype=complex)
    if m_t < m + j:
        raise InvalidInput(f"target scale {m_t} coarser than {m + j}")
    aq = as_fraction(a, p)
    e = denominator_exponent(aq, p)
    A = aq.numerator * (p ** e // aq.denominator)
    # p^M y = (v p^alpha - A p^beta) / p^s0 for grid point v / p^M_t
    s0 = max(M_t + j - M, e - M, 0)
    alpha = s0 - (M_t + j - M)
    beta = s0 - (e - M)
    Q = p ** (s0 + M + m)
    c1 = pow(p, alpha, Q) if Q > 1 else 0
    c2 = (A * pow(p, beta, Q)) % Q if Q > 1 else 0
    v = np.arange(p ** n_t, dtype=np.int64)
    N = _mod_array(v, c1, c2, Q)
    ps0 = p ** s0
    inside = (N % ps0) == 0
    w = (N // ps0) % (p ** (M + m))
    out = np.zeros(p ** n_t, dtype=complex)
    idx = np.flatnonzero(inside.astype(bool))
    out[idx] = f.values[w[idx].astype(np.int64)]
    return out


def evaluate(f: TestFunction, x: Point) -> complex:
    try:
        v = coset_index(x, f.scale, f.support, f.p)
    except OutOfSupport:
        return 0j
    return complex(f.values[v])


def refine(f: TestFunction, m: int, M: int) -> np.ndarray:
    """Values of f on the (finer or equal) grid (m, M)."""
    return pullback(f, m, M)


def linear_combine(coeffs: Sequence[complex], fs: Sequence[TestFunction]) -> TestFunction:
    if len(coeffs) != len(fs) or not fs:
        raise InvalidInput("need matching, non-empty coefficient and function lists")
    p = _same_prime(fs)
    m = max(f.scale for f in fs)
    M = max(f.support for f in fs)
    M = max(M, -m)
    total = np.zeros(p ** (m + M), dtype=complex)
    ref = 0.0
    for c, f in zip(coeffs, fs):
        if c != 0:
            total += complex(c) * pullback(f, m, M)
            ref = max(ref, abs(c) * _peak(f))
    return TestFunction(p, m, M, _snap(total, ref))


def scaled_translate(f: TestFunction, j: int, a: Point = 0) -> TestFunction:
    """f_{j,a}(x) = p^{j/2} f(x / p^j - a)."""
    p = f.p
    if f.is_zero():
        return f
    aq = as_fraction(a, p)
    ea = norm_exponent(aq, p)
    M_new = (f.support if ea is None else max(f.support, ea)) - j
    m_new = f.scale + j
    vals = pullback(f, m_new, M_new, j, aq) * p ** (j / 2)
    return TestFunction(p, m_new, M_new, vals)


def translate(f: TestFunction, t: Point = 1) -> TestFunction:
    """(T^t f)(x) = f(x - t); T^1 is the translation operator T."""
    return scaled_translate(f, 0, t)


def reflect(f: TestFunction) -> TestFunction:
    """x -> f(-x)."""
    n = f.size
    idx = (-np.arange(n)) % n
    return TestFunction(f.p, f.scale, f.support, f.values[idx])


def _common_grid(f: TestFunction, g: TestFunction) -> tuple[int, int]:
    m = max(f.scale, g.scale)
    # one factor vanishes outside the smaller ball, so integrate over it only
    M = max(min(f.support, g.support), -m)
    return m, M


def inner_product(f: TestFunction, g: TestFunction) -> complex:
    """<f, g> = integral of f * conj(g) against the normalized Haar measure."""
    p = _same_prime([f, g])
    if f.is_zero() or g.is_zero():
        return 0j
    m, M = _common_grid(f, g)
    fv = pullback(f, m, M)
    gv = pullback(g, m, M)
    return complex(np.vdot(gv, fv)) * float(p) ** (-m)


def distance(f: TestFunction, g: TestFunction) -> float:
    """Max coefficient deviation after refining both to a common grid."""
    _same_prime([f, g])
    m = max(f.scale, g.scale)
    M = max(f.support, g.support, -m)
    d = pullback(f, m, M) - pullback(g, m, M)
    return float(np.max(np.abs(d))) if d.size else 0.0


def integral(f: TestFunction) -> complex:
    return complex(np.sum(f.values)) * float(f.p) ** (-f.scale)


def project_V(f: TestFunction, k: int) -> TestFunction:
    """Orthogonal projection onto V_k: average over the cosets of p^k Z_p."""
    if k >= f.scale or f.is_zero():
        return f
    p, m = f.p, f.scale
    M = max(f.support, -k)
    vals = pullback(f, m, M).reshape(p ** (m - k), p ** (M + k)).mean(axis=0)
    return TestFunction(p, k, M, _snap(vals, _peak(f)))


def is_periodic(f: TestFunction, k: int) -> bool:
    """True iff f is p^k-periodic, i.e. f lies in V_k."""
    return f.is_zero() or f.scale <= k


def w_part(f: TestFunction, k: int) -> TestFunction:
    """Component of f in W_k = V_{k+1} minus V_k."""
    return project_V(f, k + 1) - project_V(f, k)


def eigen_project(f: TestFunction, l: int, m: int) -> TestFunction:
    """p^-m sum_j exp(2 pi i j l / p^m) T^j f, the part of f in V_{m,l}."""
    if f.scale > m:
        raise InvalidInput(f"function has scale {f.scale} > {m}")
    if m < 0:
        return f if l == 0 else zero(f.p)
    p = f.p
    M = max(f.support, 0)
    base = pullback(f, m, M)
    n = p ** m
    stride = p ** M
    acc = np.zeros_like(base)
    for j in range(n):
        acc += unit_root(j * l, n) * np.roll(base, j * stride)
    return TestFunction(p, m, M, _snap(acc / n, _peak(f)))


def translation_eigenvalue(f: TestFunction, tol: float = TOL) -> complex | None:
    """The eigenvalue of T at f, snapped to a root of unity, or None."""
    if f.is_zero():
        raise InvalidInput("the zero function has no eigenvalue")
    tf = translate(f, 1)
    nf = inner_product(f, f).real
    lam = inner_product(tf, f) / nf
    resid = (tf - lam * f).norm() / math.sqrt(nf)
    if resid > tol:
        return None
    order = f.p ** max(f.scale, 0)
    k = round(math.atan2(lam.imag, lam.real) / (2 * math.pi) * order) % order
    return unit_root(k, order)


def fourier(f: TestFunction) -> TestFunction:
    """f^(xi) = integral chi_p(xi x) f(x) dx; the roles of scale and support swap."""
    p, m, M = f.p, f.scale, f.support
    # sum_v f_v exp(2 pi i u v / p^(m+M)) is n * ifft
    vals = np.fft.ifft(f.values) * float(p) ** M
    return TestFunction(p, M, m, vals)


def inverse_fourier(g: TestFunction) -> TestFunction:
    return reflect(fourier(g))
