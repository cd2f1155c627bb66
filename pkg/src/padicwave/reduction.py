"""Constructive reduction of a wavelet vector-function to a Haar one.

The engine follows the proof structure of the classification theorem:

1. while some nontrivial combination of the components drops to V_{m-1},
   rotate it into first place and split it (rank grows by p - 1);
2. otherwise translation by 1 acts on the span by a unitary A_0 whose
   eigenvalues are p^m-th roots of unity; diagonalize it;
3. regroup the eigencomponents by label into p - 1 functions in W_0.

For a genuine orthonormal wavelet basis every branch succeeds, so a
failure anywhere is reported as a :class:`Refutation`.  Success yields an
:class:`EquivalenceChain` whose replay certifies the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .chain import EquivalenceChain, MixStep, SplitStep, merge_rounds, regroup_matrix
from .constructions import basic_haar, haar_function, split
from .linalg import unitarity_deviation, unitary_with_first_row
from .padic import InvalidInput, unit_root
from .schwartz import (
    TOL,
    distance,
    inner_product,
    linear_combine,
    project_V,
    scaled_translate,
    translate,
    translation_eigenvalue,
    w_part,
)
from .wavelets import (
    RANK_TOL,
    CheckItem,
    CheckReport,
    VectorFunction,
    gram_matrix,
    numerical_rank,
    rank_bound,
    stack,
    wpart_span_dimension,
)


class Refutation(Exception):
    """The input cannot generate an orthonormal wavelet basis.

    `step` names the engine stage, `witness` carries the offending data and
    `deviation` the measured defect when there is one.
    """

    def __init__(self, step: str, reason: str, witness: Any = None, deviation: float | None = None):
        super().__init__(f"{step}: {reason}")
        self.step = step
        self.reason = reason
        self.witness = witness
        self.deviation = deviation


class ShapeError(InvalidInput):
    """Structural preconditions of an analysis are not met."""


@dataclass
class EngineLog:
    """Deviations that passed the hard 10*tol gate but exceeded tol."""

    tol: float = TOL
    marginal: list[tuple[str, float]] = field(default_factory=list)

    def gate(self, dev: float, step: str, reason: str, witness: Any = None):
        if not dev <= 10 * self.tol:
            raise Refutation(step, f"{reason} (deviation {dev:.3g})", witness, dev)
        if dev > self.tol:
            self.marginal.append((step, float(dev)))


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.max(np.abs(v)))
    lead = v[nz[0]]
    return v * (abs(lead) / lead)


# -- lower combinations -------------------------------------------------------

def _wpart_rows(psi: VectorFunction, k: int) -> np.ndarray:
    """W_k-parts of the components as rows with the L2 inner product."""
    parts = [w_part(f, k) for f in psi]
    rows, m = stack(parts)
    return rows * float(psi.p) ** (-m / 2)


def find_lower_combo(psi: VectorFunction, m: int | None = None,
                     rank_tol: float = RANK_TOL) -> np.ndarray | None:
    """A unit alpha with sum alpha_nu psi^(nu) in V_{m-1}, or None."""
    m = psi.scale if m is None else m
    if psi.scale > m:
        raise InvalidInput(f"components reach scale {psi.scale} > {m}")
    A = _wpart_rows(psi, m - 1).T  # columns are the components
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    r = psi.rank
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        alpha = np.zeros(r, dtype=complex)
        alpha[0] = 1
        return alpha
    if s.size == r and s[-1] > rank_tol * smax:
        return None
    return _phase_normalize(vh[-1].conj())


def prop7_step(psi: VectorFunction, alpha: np.ndarray, log: EngineLog | None = None):
    """Rotate the lower combination to the front and split it.

    Returns the new vector-function and the chain steps producing it.
    """
    log = log or EngineLog()
    p, m = psi.p, psi.scale
    U = unitary_with_first_row(alpha)
    steps = [] if np.allclose(U, np.eye(psi.rank), rtol=0, atol=1e-15) else [MixStep(U)]
    comps = list(psi.components) if not steps else \
        [linear_combine(list(row), list(psi.components)) for row in U]
    first = comps[0]
    if first.is_zero() or first.norm() <= 10 * log.tol:
        raise Refutation("prop7", "a combination of the components vanishes, so they are "
                         "linearly dependent", {"alpha": alpha.tolist()})
    lower = project_V(first, m - 1)
    log.gate(distance(lower, first), "prop7", "combination is not in V_{m-1}")
    comps[0:1] = split(lower, 1)
    steps.append(SplitStep(0, 1))
    return VectorFunction(p, tuple(comps)), steps


# -- translation matrix -------------------------------------------------------

def solve_A0(psi: VectorFunction, log: EngineLog | None = None) -> np.ndarray:
    """The matrix A_0 with psi(x - 1) = A_0 psi(x)."""
    log = log or EngineLog()
    G = gram_matrix(psi.components)
    if numerical_rank(G) < psi.rank:
        raise Refutation("solve_A0", "components are linearly dependent (singular Gram matrix)",
                         {"gram_rank": numerical_rank(G)})
    shifted = [translate(f, 1) for f in psi]
    B = np.array([[inner_product(tf, g) for g in psi] for tf in shifted])
    A = B @ np.linalg.inv(G)
    resid = max(distance(tf, linear_combine(list(row), list(psi.components)))
                for tf, row in zip(shifted, A))
    log.gate(resid, "solve_A0", "translate leaves the span of the components")
    return A


def _snap_root(z: complex, order: int) -> tuple[int, complex]:
    k = round(math.atan2(z.imag, z.real) / (2 * math.pi) * order) % order
    return k, unit_root(k, order)


def prop10_step(psi: VectorFunction, m: int | None = None, log: EngineLog | None = None):
    """Diagonalize translation: returns (eigen vector-function, steps, labels).

    Eigenvalues are snapped to p^m-th roots of unity and ordered by label;
    the returned components satisfy f(x - 1) = lambda f(x) and labels l_nu
    with lambda_nu = exp(-2 pi i l_nu / p^m).
    """
    log = log or EngineLog()
    p = psi.p
    m = psi.scale if m is None else m
    order = p ** m
    A = solve_A0(psi, log)
    log.gate(unitarity_deviation(A), "prop10", "unitarity failure: A_0 is not unitary",
             {"A0": _matrix_witness(A)})
    ks = []
    for z in np.linalg.eigvals(A):
        k, root = _snap_root(complex(z), order)
        log.gate(abs(z - root), "prop10", f"eigenvalue {complex(z):.6g} is not a p^m-th root of unity",
                 {"eigenvalue": [complex(z).real, complex(z).imag]})
        ks.append(k)
    basis = []
    diag = []
    for k in sorted(set(ks), key=lambda k: (-k) % order):
        mult = ks.count(k)
        lam = unit_root(k, order)
        _, _, vh = np.linalg.svd(A - lam * np.eye(psi.rank))
        for v in vh[psi.rank - mult:]:
            basis.append(_phase_normalize(v.conj()))
            diag.append(k)
    V = np.array(basis).T
    log.gate(unitarity_deviation(V), "prop10", "eigenvectors do not form a unitary basis")
    W = V.conj().T
    steps = [] if np.allclose(W, np.eye(psi.rank), rtol=0, atol=1e-15) else [MixStep(W)]
    comps = [linear_combine(list(row), list(psi.components)) for row in W] if steps \
        else list(psi.components)
    labels = [(-k) % order for k in diag]
    for nu, (f, k) in enumerate(zip(comps, diag), start=1):
        lam = unit_root(k, order)
        log.gate(distance(translate(f, 1), lam * f), "prop10",
                 f"component {nu} is not an eigenfunction", nu)
        log.gate(distance(project_V(f, m - 1), f * 0), "prop10",
                 f"component {nu} is not in W_(m-1)", nu)
    return VectorFunction(p, tuple(comps)), steps, labels


def _matrix_witness(A: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


# -- classification and regrouping -------------------------------------------

def S_m(p: int, m: int) -> list[int]:
    return [l for l in range(p ** m) if l % p]


@dataclass
class EigenClassification:
    p: int
    m: int
    labels: list[int]
    groups: dict[int, list[int]]  # mu -> 1-based component numbers

    @property
    def in_S_m(self) -> list[bool]:
        return [l % self.p != 0 for l in self.labels]


def eigen_labels(psi: VectorFunction, m: int, tol: float = TOL) -> list[int | None]:
    """l_nu with psi^(nu)(x-1) = exp(-2 pi i l_nu / p^m) psi^(nu)(x), None if not eigen."""
    out = []
    order = psi.p ** m
    for f in psi:
        lam = translation_eigenvalue(f, 10 * tol)
        if lam is None:
            out.append(None)
            continue
        k, _ = _snap_root(lam, order)
        out.append((-k) % order)
    return out


def classify_eigen(psi: VectorFunction, m: int | None = None, labels: list[int] | None = None,
                   tol: float = TOL) -> EigenClassification:
    p = psi.p
    m = psi.scale if m is None else m
    if labels is None:
        labels = eigen_labels(psi, m, tol)
    if any(l is None for l in labels):
        bad = [nu for nu, l in enumerate(labels, start=1) if l is None]
        raise Refutation("classify", "components are not translation eigenfunctions", bad)
    need = (p - 1) * p ** (m - 1)
    divisible = [nu for nu, l in enumerate(labels, start=1) if l % p == 0]
    if divisible:
        raise Refutation("classify", "some labels are divisible by p", divisible)
    if sorted(labels) != S_m(p, m):
        raise Refutation("classify", f"labels do not biject onto S_{m} (rank {psi.rank}, "
                         f"need {need})", {"labels": list(labels)})
    groups = {mu: [nu for nu, l in enumerate(labels, start=1) if l % p == mu] for mu in range(1, p)}
    return EigenClassification(p, m, list(labels), groups)


def prop11_regroup(psi: VectorFunction, cls: EigenClassification, log: EngineLog | None = None):
    """Returns (f^(1), ..., f^(p-1)) and the chain steps producing it."""
    log = log or EngineLog()
    p, m = psi.p, cls.m
    R = regroup_matrix(p, m, cls.labels)
    steps = [] if np.allclose(R, np.eye(psi.rank), rtol=0, atol=1e-15) else [MixStep(R)]
    steps += merge_rounds(p, p - 1, m)
    v = psi
    for s in steps:
        if s.kind == "merge":
            log.gate(s.defect(v), "prop11", "regrouped pieces do not merge", s.components)
        v = s.apply(v)
    direct = [linear_combine([p ** ((1 - m) / 2)] * len(cls.groups[mu]),
                             [scaled_translate(psi[nu - 1], 1 - m, 0) for nu in cls.groups[mu]])
              for mu in range(1, p)]
    for mu, (f, g) in enumerate(zip(v, direct), start=1):
        log.gate(distance(f, g), "prop11", f"replayed f^({mu}) differs from its formula", mu)
        log.gate(abs(f.norm() - 1), "prop11", f"f^({mu}) is not normalized", mu)
    return v, steps


# -- Haar coordinates ---------------------------------------------------------

def _haar_shape(psi: VectorFunction, tol: float) -> str | None:
    p = psi.p
    if psi.rank != p - 1:
        return f"rank {psi.rank} differs from p - 1 = {p - 1}"
    for nu, f in enumerate(psi, start=1):
        if f.scale > 1 or distance(project_V(f, 0), f * 0) > tol:
            return f"component {nu} is not in W_0"
    return None


def haar_coordinates(psi: VectorFunction, tol: float = TOL):
    """Coordinates of a rank p-1 vector-function in W_0 over translated Haar functions.

    Returns (c, n, U): c[mu, nu, k] = <psi^(mu), theta^(nu)_{0,k/p^n}> (0-based
    mu, nu), the smallest n with every support inside p^-n Z_p, and the
    matrix U with psi' = U theta', where primes denote the splits into p^n
    pieces in (component, k) order.
    """
    p = psi.p
    problem = _haar_shape(psi, tol)
    if problem:
        raise ShapeError(problem)
    n = max(max(f.support for f in psi), 0)
    thetas = [haar_function(p, nu) for nu in range(1, p)]
    c = np.array([[[inner_product(f, scaled_translate(t, 0, Fraction(k, p ** n)))
                    for k in range(p ** n)] for t in thetas] for f in psi])
    psi_pieces = [g for f in psi for g in (split(f, n) if n else [f])]
    theta_pieces = [g for t in thetas for g in (split(t, n) if n else [t])]
    U = np.array([[inner_product(g, t) for t in theta_pieces] for g in psi_pieces])
    return c, n, U


def haar_report(psi: VectorFunction, tol: float = TOL) -> CheckReport:
    """Standard-Haar test: shape, exact expansion over Haar translates, unitary U."""
    rep = CheckReport("standard-haar")
    problem = _haar_shape(psi, tol)
    if problem:
        rep.items.append(CheckItem(problem, math.inf, tol, None))
        return rep
    c, n, U = haar_coordinates(psi, tol)
    p = psi.p
    thetas = [haar_function(p, nu) for nu in range(1, p)]
    recon = 0.0
    for mu, f in enumerate(psi):
        g = linear_combine([c[mu, nu, k] for nu in range(p - 1) for k in range(p ** n)],
                           [scaled_translate(t, 0, Fraction(k, p ** n))
                            for t in thetas for k in range(p ** n)])
        recon = max(recon, distance(f, g))
    rep.items.append(CheckItem("expansion over translated Haar functions", recon, tol, n))
    rep.items.append(CheckItem("coordinate matrix is unitary", unitarity_deviation(U), tol, n))
    return rep


def is_standard_haar(psi: VectorFunction, tol: float = TOL) -> bool:
    return haar_report(psi, tol).passed


def is_eigen_standard_haar(psi: VectorFunction, tol: float = TOL) -> bool:
    if not is_standard_haar(psi, tol):
        return False
    labels = eigen_labels(psi, 1, tol)
    return None not in labels and sorted(labels) == list(range(1, psi.p))


def to_basic_steps(psi: VectorFunction, tol: float = TOL) -> list:
    """Steps taking a standard Haar vector-function to Theta: split, U*, merge."""
    p = psi.p
    _, n, U = haar_coordinates(psi, tol)
    steps = []
    if n:
        for i in range(p - 1):
            steps.append(SplitStep(i * p ** n, n))
    W = U.conj().T
    if not np.allclose(W, np.eye(W.shape[0]), rtol=0, atol=1e-15):
        steps.append(MixStep(W))
    if n:
        steps += merge_rounds(p, p - 1, n + 1)
    return steps


# -- the engine ---------------------------------------------------------------

def reduce_to_haar(psi: VectorFunction, tol: float = TOL, to_basic: bool = False,
                   log: EngineLog | None = None) -> tuple[VectorFunction, EquivalenceChain]:
    """Reduce psi to an eigen standard Haar vector-function (or Theta).

    Raises :class:`Refutation` when a step that must succeed for an
    orthonormal wavelet basis fails.  Deviations between tol and 10*tol are
    collected in `log.marginal`.
    """
    log = log if log is not None else EngineLog(tol)
    p = psi.p
    steps: list = []
    v = psi
    for nu, f in enumerate(psi, start=1):
        if f.scale <= 0:
            raise Refutation("scale", f"component {nu} lies in V_0 and so cannot be orthogonal "
                             "to its own translates and dilates", nu)
    if psi.rank % (p - 1):
        raise Refutation("rank", f"rank {psi.rank} is not divisible by p - 1 = {p - 1}", psi.rank)
    while True:
        m = v.scale
        bound = rank_bound(p, m)
        if v.rank > bound:
            raise Refutation("rank", f"rank {v.rank} exceeds (p-1)p^(m-1) = {bound} at m = {m}",
                             {"rank": v.rank, "m": m})
        alpha = find_lower_combo(v, m)
        if alpha is None:
            break
        v, new = prop7_step(v, alpha, log)
        steps += new
    m = v.scale
    v, new, labels = prop10_step(v, m, log)
    steps += new
    cls = classify_eigen(v, m, labels, tol)
    v, new = prop11_regroup(v, cls, log)
    steps += new
    report = haar_report(v, tol)
    worst = report.worst()
    log.gate(worst.deviation if worst else 0.0, "final", "result is not standard Haar")
    if to_basic:
        new = to_basic_steps(v, tol)
        for s in new:
            v = s.apply(v)
        steps += new
        log.gate(max(distance(f, g) for f, g in zip(v, basic_haar(p))), "final",
                 "result is not the basic Haar vector-function")
    chain = EquivalenceChain(psi, steps, v)
    for r in chain.rank_trace():
        if r % (p - 1):
            raise Refutation("rank", f"intermediate rank {r} not divisible by p - 1", r)
    return v, chain


# -- the dimension obstruction ------------------------------------------------

@dataclass
class ObstructionReport:
    verdict: str  # "impossible" or "inconclusive"
    dimension: int
    detail: str

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "dimension": self.dimension, "detail": self.detail}


def reducibility_obstruction(psi: VectorFunction, tol: float = TOL) -> ObstructionReport:
    """Dimension test ruling out reducibility of a rank 4 basis over p = 2.

    Applies when every component is in V_4 and at least one is in V_3.  A
    reduction would start with a unitary step into a rank-4 family whose
    W_3-parts span at most 2 dimensions; unitary steps preserve that span,
    so d = 3 rules reduction out.
    """
    if psi.p != 2 or psi.rank != 4:
        raise ShapeError(f"needs p = 2 and rank 4, got p = {psi.p}, rank {psi.rank}")
    scales = [f.scale for f in psi]
    if max(scales) > 4 or min(scales) > 3:
        raise ShapeError(f"needs all components in V_4 and one in V_3; scales are {scales}")
    d = wpart_span_dimension(psi, 3, tol=tol)
    if d >= 3:
        return ObstructionReport("impossible", d,
                                 f"W_3-parts span dimension {d} > 2: not reducible to standard Haar")
    return ObstructionReport("inconclusive", d, f"W_3-parts span dimension {d} <= 2")
