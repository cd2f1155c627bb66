"""Replayable equivalence chains between vector-functions.

Each step either mixes the components by a unitary matrix or replaces
components by pieces generating the same wavelet system.  Component
positions inside steps are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .constructions import merge_candidates, merge_defect, mix_functions, split
from .linalg import as_matrix, unitarity_deviation
from .padic import InvalidInput, unit_root
from .schwartz import TOL, distance, linear_combine
from .wavelets import CheckItem, CheckReport, VectorFunction


@dataclass
class MixStep:
    matrix: np.ndarray
    kind: str = field(default="unitary", init=False)

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix)

    def apply(self, psi: VectorFunction) -> VectorFunction:
        if self.matrix.shape != (psi.rank, psi.rank):
            raise InvalidInput(f"{self.matrix.shape} matrix applied to rank {psi.rank}")
        return VectorFunction(psi.p, tuple(mix_functions(self.matrix, psi.components)))

    def defect(self, psi: VectorFunction) -> float:
        return unitarity_deviation(self.matrix)

    def rank_after(self, p: int, r: int) -> int:
        return r


@dataclass
class SplitStep:
    component: int
    n: int = 1
    kind: str = field(default="split", init=False)

    def apply(self, psi: VectorFunction) -> VectorFunction:
        if not 0 <= self.component < psi.rank:
            raise InvalidInput(f"split of component {self.component} at rank {psi.rank}")
        comps = list(psi.components)
        comps[self.component:self.component + 1] = split(comps[self.component], self.n)
        return VectorFunction(psi.p, tuple(comps))

    def defect(self, psi: VectorFunction) -> float:
        return 0.0

    def rank_after(self, p: int, r: int) -> int:
        return r + p ** self.n - 1


@dataclass
class MergeStep:
    """Replace the listed p components (in that order, piece k first being
    f_{1,k/p}) by their merge, inserted at `position` of the shortened list."""

    components: list[int]
    position: int
    kind: str = field(default="merge", init=False)

    def _parts(self, psi: VectorFunction):
        if len(set(self.components)) != len(self.components) or \
                any(not 0 <= c < psi.rank for c in self.components):
            raise InvalidInput(f"bad merge indices {self.components} at rank {psi.rank}")
        rest = [f for i, f in enumerate(psi.components) if i not in self.components]
        if not 0 <= self.position <= len(rest):
            raise InvalidInput(f"merge position {self.position} outside 0..{len(rest)}")
        return [psi[c] for c in self.components], rest

    def apply(self, psi: VectorFunction) -> VectorFunction:
        pieces, rest = self._parts(psi)
        cands = merge_candidates(pieces)
        f = linear_combine([1 / len(cands)] * len(cands), cands)
        rest.insert(self.position, f)
        return VectorFunction(psi.p, tuple(rest))

    def defect(self, psi: VectorFunction) -> float:
        pieces, _ = self._parts(psi)
        return merge_defect(pieces)

    def rank_after(self, p: int, r: int) -> int:
        return r - len(self.components) + 1


def regroup_matrix(p: int, m: int, labels: list[int]) -> np.ndarray:
    """Rows (mu, k), mu = 1..p-1 and k < p^(m-1); column nu.

    Row (mu, k) combines the components with label l = mu mod p, and equals
    split(f^(mu), m-1)[k] where f^(mu) is the regrouped function.
    """
    n = p ** (m - 1)
    R = np.zeros(((p - 1) * n, len(labels)), dtype=complex)
    scale = p ** ((1 - m) / 2)
    for nu, l in enumerate(labels):
        mu = l % p
        if mu == 0:
            raise InvalidInput(f"label {l} is divisible by p")
        for k in range(n):
            R[(mu - 1) * n + k, nu] = scale * unit_root(-l * k, p ** m)
    return R


def merge_rounds(p: int, groups: int, m: int) -> list[MergeStep]:
    """Merges collapsing `groups` consecutive runs of p^(m-1) split pieces."""
    steps = []
    size = groups * p ** (m - 1)
    for _ in range(m - 1):
        for b in range(size // p):
            steps.append(MergeStep(list(range(b, b + p)), b))
        size //= p
    return steps


@dataclass
class RegroupStep:
    """Regrouping of an eigen vector-function by translation labels.

    Equivalent to the unitary step :func:`regroup_matrix` followed by
    :func:`merge_rounds`; replayed that way.
    """

    m: int
    labels: list[int]
    kind: str = field(default="regroup", init=False)

    def expand(self, p: int) -> list:
        return [MixStep(regroup_matrix(p, self.m, self.labels))] + merge_rounds(p, p - 1, self.m)

    def apply(self, psi: VectorFunction) -> VectorFunction:
        for s in self.expand(psi.p):
            psi = s.apply(psi)
        return psi

    def defect(self, psi: VectorFunction) -> float:
        worst = 0.0
        for s in self.expand(psi.p):
            worst = max(worst, s.defect(psi))
            psi = s.apply(psi)
        return worst

    def rank_after(self, p: int, r: int) -> int:
        return p - 1


Step = Union[MixStep, SplitStep, MergeStep, RegroupStep]


@dataclass
class EquivalenceChain:
    start: VectorFunction
    steps: list = field(default_factory=list)
    end: VectorFunction | None = None

    def __post_init__(self):
        if self.end is None:
            self.end = self.replay()

    def replay(self) -> VectorFunction:
        v = self.start
        for s in self.steps:
            v = s.apply(v)
        return v

    def rank_trace(self) -> list[int]:
        p, r = self.start.p, self.start.rank
        trace = [r]
        for s in self.steps:
            r = s.rank_after(p, r)
            trace.append(r)
        return trace

    def __len__(self):
        return len(self.steps)


def verify_chain(chain: EquivalenceChain, tol: float = TOL) -> CheckReport:
    """Replay every step, checking that each one is legal, then match the end."""
    rep = CheckReport("chain")
    v = chain.start
    for i, s in enumerate(chain.steps):
        try:
            dev = s.defect(v)
            v = s.apply(v)
        except (InvalidInput, ValueError) as exc:
            rep.items.append(CheckItem(f"step {i} ({s.kind}): {exc}", math.inf, tol, i))
            return rep
        rep.items.append(CheckItem(f"step {i} ({s.kind})", dev, tol, i))
    end = chain.end
    if end.rank != v.rank or end.p != v.p:
        rep.items.append(CheckItem(f"end rank {end.rank}, replay gives {v.rank}", math.inf, tol,
                                   len(chain.steps)))
        return rep
    dev = max(distance(f, g) for f, g in zip(v, end))
    rep.items.append(CheckItem("end matches replay", dev, tol, len(chain.steps)))
    return rep
