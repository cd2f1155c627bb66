"""Command-line interface: construct, verify, reduce, analyze, chain-verify, fourier.

Exit codes: 0 proven (or success), 1 refuted, 2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import __version__
from .chain import verify_chain
from .constructions import EXAMPLE_STAGES, basic_haar, example_3_3, random_damaged, theorem3_counterexample
from .formats import (
    FormatError,
    read_any,
    read_pwcert,
    read_pwf,
    write_pwcert,
    write_pwf,
    write_pwv,
)
from .padic import InvalidInput
from .reduction import (
    EngineLog,
    Refutation,
    ShapeError,
    eigen_labels,
    haar_report,
    reduce_to_haar,
    reducibility_obstruction,
)
from .schwartz import TOL, fourier, inverse_fourier
from .wavelets import FAIL, MARGINAL, PASS, _jsonable, battery, wpart_span_dimension

SCHEMA = "padicwave-report/1"
EXIT_PROVEN, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
VERDICT_NAMES = {EXIT_PROVEN: "proven", EXIT_REFUTED: "refuted", EXIT_INCONCLUSIVE: "inconclusive"}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _emit(args, report: dict, lines: list[str]):
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(report, indent=1) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _describe(psi) -> dict:
    return {"p": psi.p, "rank": psi.rank, "scale": psi.scale,
            "supports": [f.support for f in psi]}


def _refutation_dict(exc: Refutation) -> dict:
    return {"step": exc.step, "reason": exc.reason, "witness": _jsonable(exc.witness)}


def _reduce(psi, tol: float, to_basic: bool = False):
    """Run the engine; returns (exit code, summary dict, chain or None, lines)."""
    log = EngineLog(tol)
    try:
        end, chain = reduce_to_haar(psi, tol, to_basic=to_basic, log=log)
    except Refutation as exc:
        return EXIT_REFUTED, {"status": "refuted", "refutation": _refutation_dict(exc)}, None, \
            [f"reduction: refuted at {exc.step}: {exc.reason}"]
    vc = verify_chain(chain, tol)
    hr = haar_report(end, tol)
    trace = chain.rank_trace()
    summary = {"status": "reduced", "rank_trace": trace, "steps": len(chain.steps),
               "chain": vc.to_dict(), "end_standard_haar": hr.to_dict(),
               "marginal": [{"step": s, "deviation": d} for s, d in log.marginal]}
    lines = [f"reduction: {len(chain.steps)} steps, rank trace {' '.join(map(str, trace))}",
             f"chain replay: {vc.verdict} (max deviation {vc.max_deviation:.3g})",
             f"end is standard Haar: {hr.verdict} (max deviation {hr.max_deviation:.3g})"]
    if vc.verdict == FAIL or hr.verdict == FAIL:
        code = EXIT_INCONCLUSIVE
    elif log.marginal or vc.verdict == MARGINAL or hr.verdict == MARGINAL:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_PROVEN
    return code, summary, chain, lines


# -- commands -----------------------------------------------------------------

def cmd_construct(args) -> int:
    cert = None
    if args.name == "haar":
        psi = basic_haar(args.p)
    elif args.name == "example33-stage":
        psi = example_3_3(args.stage)
    elif args.name == "theorem3":
        psi, _ = theorem3_counterexample()
    else:
        if args.steps < 0:
            raise InvalidInput("--steps must be non-negative")
        psi, cert = random_damaged(args.p, args.steps, args.seed)
    _write(args.output, write_pwv(psi))
    if args.cert:
        if cert is None:
            raise InvalidInput("--cert is only produced by random-damaged")
        _write(args.cert, write_pwcert(cert))
    return EXIT_PROVEN


def cmd_verify(args) -> int:
    psi = read_any(_read(args.input))
    reports = battery(psi, args.window, args.tol)
    lines = [f"input: p={psi.p} rank={psi.rank} scale={psi.scale}"]
    for r in reports:
        worst = r.worst()
        where = f", worst at {_jsonable(worst.witness)}" if worst and r.verdict != PASS else ""
        lines.append(f"{r.name}: {r.verdict} (max deviation {r.max_deviation:.3g}{where})")
    report: dict[str, Any] = {"schema": SCHEMA, "command": "verify", "input": _describe(psi),
                              "tolerance": args.tol, "window": args.window,
                              "checks": [r.to_dict() for r in reports]}
    failed = [r for r in reports if r.verdict == FAIL]
    if failed:
        item = failed[0].first_failure()
        code = EXIT_REFUTED
        report["reduction"] = {"status": "skipped"}
        report["witness"] = {"check": failed[0].name, "item": item.to_dict()}
        lines.append(f"witness: {failed[0].name}: {item.name} deviates by {item.deviation:.3g}")
    else:
        code, summary, _, more = _reduce(psi, args.tol)
        report["reduction"] = summary
        lines += more
        if code == EXIT_PROVEN and any(r.verdict == MARGINAL for r in reports):
            code = EXIT_INCONCLUSIVE
    report["verdict"] = VERDICT_NAMES[code]
    report["exit_code"] = code
    lines.append(f"verdict: {VERDICT_NAMES[code]}" + (" orthonormal wavelet basis" if code == 0 else ""))
    _emit(args, report, lines)
    return code


def cmd_reduce(args) -> int:
    psi = read_any(_read(args.input))
    code, summary, chain, lines = _reduce(psi, args.tol, args.to_basic)
    if chain is not None and args.output:
        _write(args.output, write_pwcert(chain))
    report = {"schema": SCHEMA, "command": "reduce", "input": _describe(psi),
              "tolerance": args.tol, "reduction": summary,
              "verdict": VERDICT_NAMES[code], "exit_code": code}
    lines.append(f"verdict: {VERDICT_NAMES[code]}")
    _emit(args, report, lines)
    return code


def cmd_analyze(args) -> int:
    psi = read_any(_read(args.input))
    report: dict[str, Any] = {"schema": SCHEMA, "command": "analyze", "input": _describe(psi)}
    lines = []
    if args.wpart is not None:
        d = wpart_span_dimension(psi, args.wpart, tol=args.tol)
        report["wpart"] = {"k": args.wpart, "dimension": d}
        lines.append(f"W_{args.wpart}-parts span dimension {d}")
    if args.eigen:
        m = max(psi.scale, 0)
        labels = eigen_labels(psi, m, args.tol)
        report["eigen"] = {"m": m, "labels": labels}
        for nu, l in enumerate(labels, start=1):
            lines.append(f"component {nu}: " + ("not a translation eigenfunction" if l is None else
                                                 f"l = {l} (eigenvalue exp(-2 pi i {l}/{psi.p}^{m}))"))
    if args.obstruction:
        ob = reducibility_obstruction(psi, args.tol)
        report["obstruction"] = ob.to_dict()
        if ob.verdict == "impossible":
            lines.append(f"not reducible to standard Haar (d={ob.dimension})")
        else:
            lines.append(f"inconclusive (d={ob.dimension})")
    report["exit_code"] = 0
    _emit(args, report, lines)
    return 0


def cmd_chain_verify(args) -> int:
    chain = read_pwcert(_read(args.input))
    rep = verify_chain(chain, args.tol)
    lines = [f"chain: {len(chain.steps)} steps, rank trace {' '.join(map(str, chain.rank_trace()))}"
             if rep.verdict != FAIL else f"chain: {len(chain.steps)} steps"]
    report: dict[str, Any] = {"schema": SCHEMA, "command": "chain-verify", "chain": rep.to_dict()}
    if rep.verdict == FAIL:
        bad = rep.first_failure()
        report["failing_step"] = bad.witness
        lines.append(f"FAIL at step {bad.witness}: {bad.name} (deviation {bad.deviation:.3g})")
        code = EXIT_REFUTED
    else:
        ends = {"start": haar_report(chain.start, args.tol).passed,
                "end": haar_report(chain.end, args.tol).passed}
        report["standard_haar"] = ends
        certified = ends["start"] or ends["end"]
        report["certifies_onwb"] = certified
        lines.append(f"chain replay: {rep.verdict} (max deviation {rep.max_deviation:.3g})")
        lines.append("certifies an orthonormal wavelet basis: " + ("yes" if certified else
                     "no (neither end is standard Haar)"))
        code = EXIT_PROVEN if rep.verdict == PASS else EXIT_INCONCLUSIVE
    report["exit_code"] = code
    _emit(args, report, lines)
    return code


def cmd_fourier(args) -> int:
    f = read_pwf(_read(args.input))
    _write(args.output, write_pwf(inverse_fourier(f) if args.inverse else fourier(f)))
    return 0


# -- parser ---------------------------------------------------------------------

def _prime_arg(s: str) -> int:
    from .padic import is_prime
    try:
        p = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _tol_arg(s: str) -> float:
    try:
        t = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not a number") from None
    if not t > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return t


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="padicwave", description="p-adic wavelet construction and verification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="write a known vector-function as pwv")
    c.add_argument("name", choices=["haar", "example33-stage", "theorem3", "random-damaged"])
    c.add_argument("--p", type=_prime_arg, default=2)
    c.add_argument("--stage", choices=EXAMPLE_STAGES, default="tilde-prime")
    c.add_argument("--steps", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output", default=None)
    c.add_argument("--cert", default=None, help="also write the damaging chain (random-damaged)")
    c.set_defaults(func=cmd_construct)

    def common(sp, window=False):
        sp.add_argument("input")
        sp.add_argument("--tol", type=_tol_arg, default=TOL)
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        if window:
            sp.add_argument("--window", type=int, default=1)

    v = sub.add_parser("verify", help="decide whether a pwv generates an orthonormal wavelet basis")
    common(v, window=True)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", help="reduce to a standard Haar vector-function, writing a pwcert")
    common(r)
    r.add_argument("-o", "--output", default=None)
    r.add_argument("--to-basic", action="store_true", help="continue down to the basic Haar vector")
    r.set_defaults(func=cmd_reduce)

    a = sub.add_parser("analyze", help="W_k-part dimensions, eigen labels, reducibility obstruction")
    common(a)
    a.add_argument("--wpart", type=int, default=None, metavar="K")
    a.add_argument("--eigen", action="store_true")
    a.add_argument("--obstruction", action="store_true")
    a.set_defaults(func=cmd_analyze)

    cv = sub.add_parser("chain-verify", help="replay and check a pwcert")
    common(cv)
    cv.set_defaults(func=cmd_chain_verify)

    f = sub.add_parser("fourier", help="Fourier transform of a pwf")
    f.add_argument("input")
    f.add_argument("-o", "--output", default=None)
    f.add_argument("--inverse", action="store_true")
    f.set_defaults(func=cmd_fourier)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "analyze" and args.wpart is None and not args.eigen and not args.obstruction:
            parser.error("analyze needs --wpart K, --eigen or --obstruction")
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, FormatError, ShapeError, InvalidInput) as exc:
        print(f"padicwave: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
