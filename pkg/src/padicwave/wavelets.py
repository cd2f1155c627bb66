"""Wavelet systems generated by vector-functions and the checks run on them.

Component numbers that appear in reports and :class:`WaveletIndex` are
1-based, matching the usual psi^(1), ..., psi^(r) labelling; Python lists of
components are indexed from 0 as usual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .padic import InvalidInput, Point, as_fraction, check_prime, frac_fraction, I_p_in_ball
from .schwartz import (
    TOL,
    TestFunction,
    evaluate,
    integral,
    project_V,
    pullback,
    scaled_translate,
    w_part,
)

RANK_TOL = 1e-7


@dataclass(frozen=True)
class VectorFunction:
    p: int
    components: tuple[TestFunction, ...]

    def __post_init__(self):
        check_prime(self.p)
        comps = tuple(self.components)
        if not comps:
            raise InvalidInput("a vector-function needs at least one component")
        for i, f in enumerate(comps, start=1):
            if f.p != self.p:
                raise InvalidInput(f"component {i} is over p={f.p}, expected {self.p}")
            if f.is_zero():
                raise InvalidInput(f"component {i} is the zero function")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *fs: TestFunction) -> "VectorFunction":
        return cls(fs[0].p, tuple(fs))

    @property
    def rank(self) -> int:
        return len(self.components)

    @property
    def scale(self) -> int:
        """Smallest m with every component in V_m."""
        return max(f.scale for f in self.components)

    def __len__(self):
        return self.rank

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def gram(self) -> np.ndarray:
        return gram_matrix(self.components)

    def allclose(self, other: "VectorFunction", tol: float = TOL) -> bool:
        return (self.p == other.p and self.rank == other.rank
                and all(f.allclose(g, tol) for f, g in zip(self, other)))


def gram_matrix(fs: Sequence[TestFunction]) -> np.ndarray:
    """G[i, k] = <f_i, f_k>, computed on one common grid."""
    vecs, m = stack(fs)
    return (np.conj(vecs) @ vecs.T).T * float(fs[0].p) ** (-m)


def stack(fs: Sequence[TestFunction]) -> tuple[np.ndarray, int]:
    """Coefficient rows of fs on their common grid, plus that grid's scale."""
    m = max(f.scale for f in fs)
    M = max(max(f.support for f in fs), -m)
    return np.array([pullback(f, m, M) for f in fs]), m


@dataclass(frozen=True)
class WaveletIndex:
    level: int
    shift: Fraction
    component: int

    def __post_init__(self):
        s = Fraction(self.shift)
        if not 0 <= s < 1:
            raise InvalidInput(f"shift {s} is not in I_p")
        object.__setattr__(self, "shift", s)


def system_member(psi: VectorFunction, idx: WaveletIndex) -> TestFunction:
    if not 1 <= idx.component <= psi.rank:
        raise InvalidInput(f"component {idx.component} outside 1..{psi.rank}")
    frac_fraction(idx.shift, psi.p)  # rejects non p-power denominators
    return scaled_translate(psi[idx.component - 1], idx.level, idx.shift)


# -- reports ------------------------------------------------------------------

PASS, FAIL, MARGINAL = "pass", "fail", "marginal"


def classify(deviation: float, tol: float) -> str:
    if deviation > 10 * tol:
        return FAIL
    if deviation > tol:
        return MARGINAL
    return PASS


@dataclass
class CheckItem:
    name: str
    deviation: float
    tolerance: float
    witness: Any = None

    @property
    def verdict(self) -> str:
        return classify(self.deviation, self.tolerance)

    def to_dict(self) -> dict:
        dev = float(self.deviation)
        return {"name": self.name, "deviation": dev if math.isfinite(dev) else "inf",
                "tolerance": self.tolerance, "verdict": self.verdict,
                "witness": _jsonable(self.witness)}


def _jsonable(w):
    if isinstance(w, Fraction):
        return str(w)
    if isinstance(w, (list, tuple)):
        return [_jsonable(x) for x in w]
    if isinstance(w, dict):
        return {str(k): _jsonable(v) for k, v in w.items()}
    if isinstance(w, (np.integer,)):
        return int(w)
    if isinstance(w, (np.floating,)):
        return float(w)
    return w


def _finite(x: float):
    return float(x) if math.isfinite(x) else "inf"


@dataclass
class CheckReport:
    name: str
    items: list[CheckItem] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        verdicts = {i.verdict for i in self.items}
        if FAIL in verdicts:
            return FAIL
        if MARGINAL in verdicts:
            return MARGINAL
        return PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def max_deviation(self) -> float:
        return max((i.deviation for i in self.items), default=0.0)

    def worst(self) -> CheckItem | None:
        return max(self.items, key=lambda i: i.deviation, default=None)

    def first_failure(self) -> CheckItem | None:
        for item in self.items:
            if item.verdict == FAIL:
                return item
        return None

    def to_dict(self) -> dict:
        worst = self.worst()
        return {"name": self.name, "verdict": self.verdict,
                "max_deviation": _finite(self.max_deviation),
                "worst": worst.to_dict() if worst else None,
                "items": [i.to_dict() for i in self.items]}


# -- checks -------------------------------------------------------------------

def zero_mean_check(psi: VectorFunction, tol: float = TOL) -> CheckReport:
    rep = CheckReport("zero-mean")
    for nu, f in enumerate(psi, start=1):
        rep.items.append(CheckItem(f"integral of component {nu}", abs(integral(f)), tol, nu))
    return rep


def _correlate(F: TestFunction, g: TestFunction, M_min: int) -> tuple[np.ndarray, int, int]:
    """corr[u] = <F(. - u/p^M), g> for every shift u on a common grid.

    The grid is the coset group p^-M Z_p / p^m Z_p, which is cyclic, so all
    translates are obtained at once from one FFT cross-correlation.
    """
    p = F.p
    m = max(F.scale, g.scale)
    M = max(F.support, g.support, M_min, -m)
    fv = pullback(F, m, M)
    gv = pullback(g, m, M)
    n = fv.size
    raw = np.fft.ifft(np.fft.fft(fv) * np.conj(np.fft.fft(gv)))
    return raw[(-np.arange(n)) % n] * float(p) ** (-m), m, M


def pair_products(psi: VectorFunction, mu: int, nu: int, j: int) -> dict[Fraction, complex]:
    """All overlapping values <psi^(mu)_{j,c}, psi^(nu)> at one level j >= 0.

    Every inner product of two system members reduces to this form with
    c = a - b / p^j for a, b in I_p, i.e. c ranges over the p-power rationals
    in (-p^-j, 1).  Only those with |c|_p <= p^K can overlap, where
    K = max(M_mu, M_nu + j, 0).  Components are 1-based.
    """
    if j < 0:
        raise InvalidInput("reduce to j >= 0 by swapping the pair")
    p = psi.p
    f, g = psi[mu - 1], psi[nu - 1]
    K = max(f.support, g.support + j, 0)
    F = scaled_translate(f, j, 0)
    corr, m, M = _correlate(F, g, K - j)
    n = corr.size
    lo = -(p ** (K - j)) + 1 if K >= j else 0
    out = {}
    mult = p ** (M + j - K)
    for t in range(lo, p ** K):
        out[Fraction(t, p ** K)] = complex(corr[(t * mult) % n])
    return out


def reduced_product(psi: VectorFunction, mu: int, nu: int, j: int, c: Point) -> complex:
    """<psi^(mu)_{j,c}, psi^(nu)> computed directly."""
    from .schwartz import inner_product
    return inner_product(scaled_translate(psi[mu - 1], j, as_fraction(c, psi.p)), psi[nu - 1])


def orthonormality_check(psi: VectorFunction, tol: float = TOL) -> CheckReport:
    """Exhaustive check that the wavelet system of psi is orthonormal.

    For a pair (mu, nu) the dilation levels j >= m_nu + M_mu never need
    checking: there psi^(mu)_{j,c} sits inside one coset on which psi^(nu)
    is constant, and the product is a multiple of the (zero) mean.
    """
    rep = CheckReport("orthonormality")
    zm = zero_mean_check(psi, tol)
    if zm.verdict == FAIL:
        bad = zm.first_failure()
        rep.items.append(CheckItem("zero-mean prerequisite", bad.deviation, tol, bad.witness))
        return rep
    for mu in range(1, psi.rank + 1):
        for nu in range(1, psi.rank + 1):
            window = max(1, psi[nu - 1].scale + psi[mu - 1].support)
            worst, where = 0.0, None
            for j in range(window):
                for c, val in pair_products(psi, mu, nu, j).items():
                    expected = 1.0 if (mu == nu and j == 0 and c == 0) else 0.0
                    dev = abs(val - expected)
                    if dev > worst or where is None:
                        worst, where = dev, (mu, nu, j, c)
            rep.items.append(CheckItem(f"pair ({mu},{nu})", worst, tol, where))
    return rep


def cell_energies(psi: TestFunction, m: int) -> np.ndarray:
    """S[nu] = sum of |c_a|^2 over a in the cell A_nu.

    Here psi = sum_a c_a phi_{m,a} over a in I_p, and the cells partition I_p
    as A_nu = I_p intersected with ((nu-1)/p^m, nu/p^m] for nu >= 1, with A_0
    taking a = 0 and the top sliver (1 - p^-m, 1).
    """
    p = psi.p
    if m < 0 or psi.scale > m:
        raise InvalidInput(f"need psi in V_m with m >= 0 (scale {psi.scale}, m {m})")
    M = max(psi.support, -m)
    vals = pullback(psi, m, M)
    energy = np.abs(vals) ** 2 * float(p) ** (-m)
    # coefficient v sits at a = v / p^(M+m); its cell is ceil(a p^m) mod p^m
    if M >= 0:
        cells = [(-(-v // p ** M)) % p ** m for v in range(vals.size)]
    else:
        cells = [(v * p ** (-M)) % p ** m for v in range(vals.size)]
    return np.bincount(np.array(cells, dtype=np.int64), weights=energy, minlength=p ** m)


def lemma4_energy(psi: TestFunction, m: int) -> tuple[float, np.ndarray]:
    """The coefficient energy p/(p-1) sum_a |c_a|^2 and its split over the cells.

    This is the value claimed for sum_nu sum_{j>=0} sum_b
    |<phi_{m,nu/p^m}, psi_{-j,b}>|^2.  The claim holds when every cell
    carries the same energy (the Haar functions, for instance) but not in
    general; :func:`coarse_energies` gives the exact sum.
    """
    parts = cell_energies(psi, m) * psi.p / (psi.p - 1)
    return float(parts.sum()), parts


def coarse_energies(psi: TestFunction, m: int) -> np.ndarray:
    """E[nu] = sum_{j>=0} sum_{b in I_p} |<phi_{m,nu/p^m}, psi_{-j,b}>|^2, exactly.

    At level j the products against probe nu pick up the coefficients in
    the cell of p^j nu mod p^m (each with weight p^-j), so the levels j >= m
    all land in cell 0 and sum geometrically.
    """
    p = psi.p
    S = cell_energies(psi, m)
    n = p ** m
    nus = np.arange(n, dtype=np.int64)
    E = np.zeros(n)
    for j in range(m):
        E += S[(nus * p ** j) % n] * float(p) ** (-j)
    E += S[0] * float(p) ** (-m) * p / (p - 1)
    return E


def probe_energies(psi: VectorFunction, window: int = 1) -> dict[Fraction, float]:
    """Energy sum_{system} |<phi_{m,a}, member>|^2 of each probe phi_{m,a}.

    m is the common scale of psi and the probes are every a in I_p whose
    support ball meets the components' support ball widened by p^window.
    The infinite coarse tail uses :func:`coarse_energies`; the fine levels
    are a finite window beyond which the zero mean kills every term.
    """
    p = psi.p
    m = psi.scale
    Mmax = max(f.support for f in psi)
    R = max(Mmax + window + m, 0)
    probes = [Fraction(t, p ** R) for t in range(p ** R)]
    mp = max(m, R, 0)
    total = np.zeros(len(probes))
    nus = [int(a * p ** mp) for a in probes]
    for f in psi:
        coarse = coarse_energies(f, mp)
        total += coarse[nus]
        for L in range(1, f.support + mp):
            Q = project_V(f, mp - L)
            if Q.is_zero():
                continue
            for i, nu in enumerate(nus):
                w = Fraction(nu, p ** L)
                acc = 0.0
                for b in I_p_in_ball(w, Q.support, p):
                    acc += abs(evaluate(Q, w - b)) ** 2
                total[i] += acc * float(p) ** (L - mp)
    return {a: float(e) for a, e in zip(probes, total)}


def parseval_check(psi: VectorFunction, window: int = 1, tol: float = TOL) -> CheckReport:
    """Necessary completeness test: every probe phi_{m,a} has energy 1."""
    rep = CheckReport("parseval")
    for a, e in probe_energies(psi, window).items():
        rep.items.append(CheckItem(f"probe a={a}", abs(e - 1.0), tol, a))
    return rep


def numerical_rank(rows: np.ndarray, tol: float = TOL, rank_tol: float = RANK_TOL) -> int:
    if rows.size == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] <= tol:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def wpart_span_dimension(psi: VectorFunction, k: int, subset: Iterable[int] | None = None,
                         tol: float = TOL) -> int:
    """dim span of the W_k-parts of the chosen (1-based) components."""
    idx = list(range(1, psi.rank + 1)) if subset is None else list(subset)
    parts = [w_part(psi[i - 1], k) for i in idx]
    parts = [f for f in parts if not f.is_zero()]
    if not parts:
        return 0
    rows, m = stack(parts)
    return numerical_rank(rows * float(psi.p) ** (-m / 2), tol)


def rank_bound(p: int, m: int) -> Fraction:
    return Fraction(p - 1) * Fraction(p) ** (m - 1)


def rank_bound_check(psi: VectorFunction, tol: float = TOL) -> CheckReport:
    m = psi.scale
    bound = rank_bound(psi.p, m)
    excess = max(Fraction(psi.rank) - bound, Fraction(0))
    return CheckReport("rank-bound", [CheckItem(
        f"rank {psi.rank} <= (p-1)p^(m-1) = {bound} at m={m}", float(excess), tol,
        {"rank": psi.rank, "m": m, "bound": bound})])


def battery(psi: VectorFunction, window: int = 1, tol: float = TOL) -> list[CheckReport]:
    """zero-mean, rank bound, orthonormality and Parseval, in that order.

    Parseval is only meaningful for an orthonormal system and is skipped
    when orthonormality already failed.
    """
    reports = [zero_mean_check(psi, tol), rank_bound_check(psi, tol)]
    ortho = orthonormality_check(psi, tol)
    reports.append(ortho)
    if ortho.verdict != FAIL:
        reports.append(parseval_check(psi, window, tol))
    return reports
