"""Explicit wavelet vector-functions and the moves that preserve their systems.

The two moves are :func:`split` (replace f by the p^n functions
f_{n, k/p^n}, which generate exactly the same wavelet system) with its
inverse :func:`merge`, and :func:`unitary_mix`.  Everything else here is
assembled from them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import as_matrix, gram_schmidt_complete, random_unitary, unitarity_deviation
from .padic import InvalidInput, check_prime, unit_root
from .schwartz import TOL, TestFunction, distance, linear_combine, scaled_translate
from .wavelets import VectorFunction


def haar_function(p: int, nu: int) -> TestFunction:
    """theta^(nu)(x) = phi(x) chi_p(nu x / p)."""
    check_prime(p)
    return TestFunction(p, 1, 0, np.array([unit_root(nu * k, p) for k in range(p)]))


def basic_haar(p: int) -> VectorFunction:
    return VectorFunction(p, tuple(haar_function(p, nu) for nu in range(1, p)))


def split(f: TestFunction, n: int = 1) -> list[TestFunction]:
    """The p^n functions f_{n, k/p^n}, k = 0, ..., p^n - 1."""
    if n <= 0:
        raise InvalidInput(f"split needs n >= 1, got {n}")
    p = f.p
    return [scaled_translate(f, n, Fraction(k, p ** n)) for k in range(p ** n)]


def merge_candidates(fs: Sequence[TestFunction]) -> list[TestFunction]:
    """For each k, the f with f_{1,k/p} = fs[k]."""
    if not fs:
        raise InvalidInput("nothing to merge")
    p = fs[0].p
    if len(fs) != p:
        raise InvalidInput(f"merge needs exactly p = {p} functions, got {len(fs)}")
    return [scaled_translate(g, -1, -k) for k, g in enumerate(fs)]


def merge_defect(fs: Sequence[TestFunction]) -> float:
    cands = merge_candidates(fs)
    return max(distance(c, cands[0]) for c in cands)


def merge(fs: Sequence[TestFunction], tol: float = TOL) -> TestFunction | None:
    """The f with split(f, 1) == fs, or None if there is none."""
    cands = merge_candidates(fs)
    if max(distance(c, cands[0]) for c in cands) > tol:
        return None
    return linear_combine([1 / len(cands)] * len(cands), cands)


def mix_functions(U, fs: Sequence[TestFunction]) -> list[TestFunction]:
    A = as_matrix(U)
    if A.shape[1] != len(fs):
        raise InvalidInput(f"matrix has {A.shape[1]} columns for {len(fs)} functions")
    return [linear_combine(list(row), list(fs)) for row in A]


def unitary_mix(psi: VectorFunction, U, tol: float = TOL) -> VectorFunction:
    """The vector-function U psi."""
    A = as_matrix(U)
    if A.shape != (psi.rank, psi.rank):
        raise InvalidInput(f"need a {psi.rank}x{psi.rank} matrix, got {A.shape}")
    if unitarity_deviation(A) > 10 * tol:
        raise InvalidInput(f"matrix is not unitary (deviation {unitarity_deviation(A):.3g})")
    return VectorFunction(psi.p, tuple(mix_functions(A, psi.components)))


def replace_by_split(psi: VectorFunction, i: int, n: int = 1) -> VectorFunction:
    comps = list(psi.components)
    comps[i:i + 1] = split(comps[i], n)
    return VectorFunction(psi.p, tuple(comps))


# -- the worked example -------------------------------------------------------

EXAMPLE_STAGES = ("psi", "split", "split2", "tilde", "tilde-prime")

_TILDE_MIX = np.array([[1, 1, 0], [1, -1, 0], [0, 0, math.sqrt(2)]]) / math.sqrt(2)


def example_3_3(stage: str = "tilde-prime") -> VectorFunction:
    """Stages of the damaged Haar example over p = 2.

    psi         (theta,)
    split       (psi1, psi2), the halves of theta
    split2      (psi1, psi21, psi22), psi2 split again
    tilde       psi1 and psi21 rotated by 45 degrees, psi22 kept
    tilde-prime the first tilde component split once more
    """
    if stage not in EXAMPLE_STAGES:
        raise InvalidInput(f"unknown stage {stage!r}; choose from {', '.join(EXAMPLE_STAGES)}")
    v = basic_haar(2)
    if stage == "psi":
        return v
    v = replace_by_split(v, 0)
    if stage == "split":
        return v
    v = replace_by_split(v, 1)
    if stage == "split2":
        return v
    v = unitary_mix(v, _TILDE_MIX)
    if stage == "tilde":
        return v
    return replace_by_split(v, 0)


# -- the irreducible basis ----------------------------------------------------

def theorem3_lambda() -> float:
    c8, s8 = math.cos(math.pi / 8), math.sin(math.pi / 8)
    return 1 / math.sqrt(1 + c8 + s8)


def theorem3_counterexample() -> tuple[VectorFunction, dict]:
    """A rank-4 basis over p = 2 that is not reducible to a Haar one.

    Returns the vector-function (g0, g1, h2, h) and a dict with every
    intermediate function, the coefficients a, b, c and the 3x3 unitary U.
    """
    p = 2
    theta = haar_function(p, 1)
    halves = split(theta, 1)
    f = [linear_combine([unit_root(-l * (1 + 2 * k), 4) * math.sqrt(2) / 2
                         for l in range(2)], halves) for k in range(2)]
    # the g's are DFT mixes of the quarters of f1 with exponent l(3+4k)/16;
    # that is the choice under which each g is a translation eigenfunction
    # with eigenvalue exp(2 pi i (3+4k)/16) and is orthogonal to f0
    quarters = split(f[1], 2)
    g = [linear_combine([unit_root(-l * (3 + 4 * k), 16) / 2 for l in range(4)], quarters)
         for k in range(4)]
    lam = theorem3_lambda()
    a = lam
    b = lam * math.sqrt(math.cos(math.pi / 8))
    c = lam * math.sqrt(math.sin(math.pi / 8))
    zeta = lambda k: unit_root(k, 16)  # noqa: E731
    rows = np.array([[a, b, c], [zeta(4) * a, zeta(11) * b, zeta(15) * c]], dtype=complex)
    U = gram_schmidt_complete(rows)
    h0, h1, h2 = mix_functions(U, [f[0], g[2], g[3]])
    h = scaled_translate(h0, -1, 0)
    psi = VectorFunction.of(g[0], g[1], h2, h)
    inter = {"f0": f[0], "f1": f[1], "g0": g[0], "g1": g[1], "g2": g[2], "g3": g[3],
             "h0": h0, "h1": h1, "h2": h2, "h": h, "a": a, "b": b, "c": c,
             "lambda": lam, "U": U}
    return psi, inter


# -- random damage ------------------------------------------------------------

def random_damaged(p: int, steps: int, seed: int, max_rank: int = 12):
    """Theta damaged by `steps` random splits and unitary mixes.

    Returns (vector-function, chain).  Splits are skipped in favour of a mix
    once the rank reaches max_rank, keeping the results small.
    """
    from .chain import EquivalenceChain, MixStep, SplitStep

    check_prime(p)
    if steps < 0:
        raise InvalidInput("steps must be non-negative")
    rng = np.random.Generator(np.random.Philox(seed))
    start = basic_haar(p)
    v = start
    chain_steps = []
    for _ in range(steps):
        if rng.random() < 0.5 and v.rank + p - 1 <= max_rank:
            i = int(rng.integers(v.rank))
            step = SplitStep(i, 1)
        else:
            step = MixStep(random_unitary(v.rank, rng))
        v = step.apply(v)
        chain_steps.append(step)
    return v, EquivalenceChain(start, chain_steps, v)
