"""JSON text formats: pwf-1 (one function), pwv-1 (vector), pwcert-1 (chain).

Floats are written as shortest round-trip decimal strings (``repr``), so a
write/read cycle is bit-exact.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .chain import EquivalenceChain, MergeStep, MixStep, RegroupStep, SplitStep
from .padic import InvalidInput, is_prime
from .schwartz import TestFunction
from .wavelets import VectorFunction


class FormatError(InvalidInput):
    """Malformed or invalid document."""


def _num(x: float) -> str:
    return repr(float(x))


def _parse_float(s: Any, where: str) -> float:
    if isinstance(s, bool) or not isinstance(s, (str, int, float)):
        raise FormatError(f"{where}: expected a decimal string, got {s!r}")
    try:
        x = float(s)
    except ValueError:
        raise FormatError(f"{where}: not a number: {s!r}") from None
    if not math.isfinite(x):
        raise FormatError(f"{where}: non-finite value {s!r}")
    return x


def _int(doc: dict, key: str, where: str) -> int:
    if key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    x = doc[key]
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{where}: field {key!r} must be an integer, got {x!r}")
    return x


def _check_format(doc: Any, expected: str) -> dict:
    if not isinstance(doc, dict):
        raise FormatError(f"expected a JSON object for {expected}")
    if doc.get("format") != expected:
        raise FormatError(f"expected format {expected!r}, got {doc.get('format')!r}")
    return doc


def _prime(doc: dict, where: str) -> int:
    p = _int(doc, "p", where)
    if not is_prime(p):
        raise FormatError(f"{where}: p = {p} is not prime")
    return p


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None


# -- pwf ------------------------------------------------------------------------

def pwf_object(f: TestFunction) -> dict:
    coeffs = []
    if not f.is_zero():
        for v in np.flatnonzero(f.values):
            z = complex(f.values[v])
            coeffs.append({"v": int(v), "re": _num(z.real), "im": _num(z.imag)})
    return {"format": "pwf-1", "p": f.p,
            "scale": 0 if f.is_zero() else f.scale,
            "support": 0 if f.is_zero() else f.support,
            "coeffs": coeffs}


def pwf_from_object(doc: Any, where: str = "pwf") -> TestFunction:
    doc = _check_format(doc, "pwf-1")
    p = _prime(doc, where)
    m = _int(doc, "scale", where)
    M = _int(doc, "support", where)
    if m + M < 0:
        raise FormatError(f"{where}: scale + support must be non-negative")
    if m + M > 24 or p ** (m + M) > 2 ** 24:
        raise FormatError(f"{where}: grid p^(m+M) = {p}^{m + M} is too large")
    coeffs = doc.get("coeffs")
    if not isinstance(coeffs, list):
        raise FormatError(f"{where}: coeffs must be a list")
    n = p ** (m + M)
    vals = np.zeros(n, dtype=complex)
    seen = set()
    for i, c in enumerate(coeffs):
        w = f"{where}.coeffs[{i}]"
        if not isinstance(c, dict):
            raise FormatError(f"{w}: expected an object")
        v = _int(c, "v", w)
        if not 0 <= v < n:
            raise FormatError(f"{w}: index {v} outside [0, {n})")
        if v in seen:
            raise FormatError(f"{w}: duplicate index {v}")
        seen.add(v)
        vals[v] = complex(_parse_float(c.get("re", "0.0"), w), _parse_float(c.get("im", "0.0"), w))
    return TestFunction(p, m, M, vals)


def write_pwf(f: TestFunction) -> str:
    return json.dumps(pwf_object(f), indent=1) + "\n"


def read_pwf(text: str) -> TestFunction:
    return pwf_from_object(_loads(text))


# -- pwv ------------------------------------------------------------------------

def pwv_object(psi: VectorFunction) -> dict:
    return {"format": "pwv-1", "p": psi.p, "components": [pwf_object(f) for f in psi]}


def pwv_from_object(doc: Any, where: str = "pwv") -> VectorFunction:
    doc = _check_format(doc, "pwv-1")
    p = _prime(doc, where)
    comps = doc.get("components")
    if not isinstance(comps, list) or not comps:
        raise FormatError(f"{where}: components must be a non-empty list")
    fs = [pwf_from_object(c, f"{where}.components[{i}]") for i, c in enumerate(comps)]
    for i, f in enumerate(fs):
        if f.p != p:
            raise FormatError(f"{where}.components[{i}]: prime {f.p} differs from {p}")
        if f.is_zero():
            raise FormatError(f"{where}.components[{i}]: zero function")
    return VectorFunction(p, tuple(fs))


def write_pwv(psi: VectorFunction) -> str:
    return json.dumps(pwv_object(psi), indent=1) + "\n"


def read_pwv(text: str) -> VectorFunction:
    return pwv_from_object(_loads(text))


def read_any(text: str) -> VectorFunction:
    """A pwv document, or a pwf document read as a rank-1 vector-function."""
    doc = _loads(text)
    if isinstance(doc, dict) and doc.get("format") == "pwf-1":
        f = pwf_from_object(doc)
        if f.is_zero():
            raise FormatError("pwf: zero function")
        return VectorFunction.of(f)
    return pwv_from_object(doc)


# -- pwcert ---------------------------------------------------------------------

def _step_object(s) -> dict:
    if isinstance(s, MixStep):
        return {"kind": "unitary",
                "matrix": [[{"re": _num(z.real), "im": _num(z.imag)} for z in row] for row in s.matrix]}
    if isinstance(s, SplitStep):
        return {"kind": "split", "component": s.component, "n": s.n}
    if isinstance(s, MergeStep):
        return {"kind": "merge", "components": list(s.components), "position": s.position}
    if isinstance(s, RegroupStep):
        return {"kind": "regroup", "m": s.m, "labels": list(s.labels)}
    raise TypeError(f"unknown step {s!r}")


def _step_from_object(doc: Any, where: str):
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected an object")
    kind = doc.get("kind")
    if kind == "unitary":
        rows = doc.get("matrix")
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise FormatError(f"{where}: matrix must be a non-empty list of rows")
        if any(len(r) != len(rows) for r in rows):
            raise FormatError(f"{where}: matrix must be square")
        A = np.array([[complex(_parse_float(z.get("re"), where), _parse_float(z.get("im", "0.0"), where))
                       if isinstance(z, dict) else _bad(where, z) for z in r] for r in rows])
        return MixStep(A)
    if kind == "split":
        n = _int(doc, "n", where)
        if n < 1:
            raise FormatError(f"{where}: split needs n >= 1")
        return SplitStep(_int(doc, "component", where), n)
    if kind == "merge":
        comps = doc.get("components")
        if not isinstance(comps, list) or not all(isinstance(c, int) and not isinstance(c, bool)
                                                  for c in comps):
            raise FormatError(f"{where}: components must be a list of integers")
        return MergeStep(list(comps), _int(doc, "position", where))
    if kind == "regroup":
        labels = doc.get("labels")
        if not isinstance(labels, list) or not all(isinstance(c, int) and not isinstance(c, bool)
                                                   for c in labels):
            raise FormatError(f"{where}: labels must be a list of integers")
        return RegroupStep(_int(doc, "m", where), list(labels))
    raise FormatError(f"{where}: unknown step kind {kind!r}")


def _bad(where, z):
    raise FormatError(f"{where}: matrix entries must be objects with re/im, got {z!r}")


def pwcert_object(chain: EquivalenceChain) -> dict:
    return {"format": "pwcert-1", "start": pwv_object(chain.start), "end": pwv_object(chain.end),
            "steps": [_step_object(s) for s in chain.steps]}


def write_pwcert(chain: EquivalenceChain) -> str:
    return json.dumps(pwcert_object(chain), indent=1) + "\n"


def read_pwcert(text: str) -> EquivalenceChain:
    doc = _check_format(_loads(text), "pwcert-1")
    start = pwv_from_object(doc.get("start"), "start")
    end = pwv_from_object(doc.get("end"), "end")
    if start.p != end.p:
        raise FormatError("start and end are over different primes")
    steps = doc.get("steps")
    if not isinstance(steps, list):
        raise FormatError("steps must be a list")
    return EquivalenceChain(start, [_step_from_object(s, f"steps[{i}]") for i, s in enumerate(steps)], end)
