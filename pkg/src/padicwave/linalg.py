"""Small dense complex matrices: unitarity tests and the standard unitaries."""

from __future__ import annotations

import numpy as np

from .padic import InvalidInput, unit_root
from .schwartz import TOL

ComplexMatrix = np.ndarray


def as_matrix(U) -> ComplexMatrix:
    A = np.array(U, dtype=complex)
    if A.ndim != 2:
        raise InvalidInput("expected a 2-d matrix")
    return A


def unitarity_deviation(U) -> float:
    A = as_matrix(U)
    if A.shape[0] != A.shape[1]:
        return float("inf")
    return float(np.max(np.abs(A.conj().T @ A - np.eye(A.shape[0]))))


def is_unitary(U, tol: float = TOL) -> bool:
    return unitarity_deviation(U) <= tol


def dft_matrix(p: int, n: int) -> ComplexMatrix:
    """(p^{-n/2} exp(-2 pi i jk / p^n))_{j,k}."""
    N = p ** n
    return np.array([[unit_root(-j * k, N) for k in range(N)] for j in range(N)]) / np.sqrt(N)


def householder(w: np.ndarray) -> ComplexMatrix:
    """I - 2 w w* / (w* w); the identity for w = 0."""
    w = np.asarray(w, dtype=complex)
    nn = np.vdot(w, w).real
    if nn == 0:
        return np.eye(w.size, dtype=complex)
    return np.eye(w.size, dtype=complex) - 2 * np.outer(w, w.conj()) / nn


def unitary_with_first_row(alpha: np.ndarray) -> ComplexMatrix:
    """A unitary whose first row is the unit vector alpha.

    With the phase of alpha_0 divided out, alpha becomes beta with beta_0
    real and non-negative, and the Hermitian reflection swapping e_1 and
    conj(beta) has beta as its first row.  Its vector e_1 - conj(beta) is
    formed with 1 - beta_0 = s / (1 + beta_0), s = sum_{i>0} |beta_i|^2,
    which stays accurate when beta is close to e_1.
    """
    a = np.asarray(alpha, dtype=complex)
    a = a / np.linalg.norm(a)
    phase = a[0] / abs(a[0]) if abs(a[0]) > 0 else 1.0
    rest = np.conj(a[1:] / phase)
    s = float(np.vdot(rest, rest).real)
    if s == 0:
        return phase * np.eye(a.size, dtype=complex)
    w = np.concatenate([[s / (1 + abs(a[0]))], -rest])
    return phase * householder(w)


def random_unitary(n: int, rng: np.random.Generator, factors: int | None = None) -> ComplexMatrix:
    """Product of random complex Givens rotations and a diagonal phase."""
    U = np.diag(np.exp(2j * np.pi * rng.random(n)))
    if n == 1:
        return U
    for _ in range(factors if factors is not None else n * (n - 1) // 2 + 1):
        i, k = sorted(rng.choice(n, size=2, replace=False))
        theta = 0.5 * np.pi * rng.random()
        phi = 2 * np.pi * rng.random()
        G = np.eye(n, dtype=complex)
        c, s = np.cos(theta), np.sin(theta) * np.exp(1j * phi)
        G[i, i], G[i, k], G[k, i], G[k, k] = c, -np.conj(s), s, c
        U = G @ U
    return U


def gram_schmidt_complete(rows: np.ndarray, seed_vectors=None) -> ComplexMatrix:
    """Extend orthonormal rows to a full unitary, seeding with e_1, e_2, ...

    Each added row is made to have a positive real leading nonzero entry.
    """
    R = [np.asarray(r, dtype=complex) for r in rows]
    n = R[0].size
    seeds = list(seed_vectors) if seed_vectors is not None else list(np.eye(n, dtype=complex))
    for s in seeds:
        if len(R) == n:
            break
        v = np.asarray(s, dtype=complex).copy()
        for r in R:
            v = v - np.vdot(r, v) * r
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v = v / nv
        lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        R.append(v * (abs(lead) / lead))
    if len(R) != n:
        raise InvalidInput("could not complete the rows to a unitary")
    return np.array(R)
