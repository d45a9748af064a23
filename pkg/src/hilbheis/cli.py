"""Command-line entry point.

Exit codes: 0 everything held, 1 a mathematical check failed, 2 the input
could not be read or the request was refused.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .bps import EulerSeries, bps_pipeline
from .curves import (
    DEFAULT_COLENGTH_CAP,
    METHODS,
    global_euler,
    p1_quartet,
    rational_curve_euler,
    semigroup,
    smooth_poincare,
)
from .errors import CheckFailure, FormatError
from .graded import dump_json, load_json, quartet_from_dict, quartet_to_dict, slice_key, validate
from .heisenberg import check_relations, d_grading, decompose, stabilization_check
from .macdonald import (
    DGradedPoly,
    PoincareFamily,
    check_duality,
    d_from_hilb,
    duality_violations,
    euler_specialize,
    hilb_from_d,
)

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class Refused(Exception):
    """Request rejected before any computation (exit code 2)."""


def _failure(exc: CheckFailure) -> dict:
    out = {"check": exc.check, "message": str(exc)}
    if exc.locations:
        out["locations"] = [slice_key(x) if isinstance(x, tuple) else x for x in exc.locations]
    return out


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, report dict)
# ---------------------------------------------------------------------------


def cmd_verify(args) -> tuple[int, dict]:
    q = quartet_from_dict(load_json(args.input))
    v = validate(q)
    report = {"command": "verify", "validate": v.to_dict()}
    if not v.ok:
        report["passed"] = False
        report["failed_checks"] = ["validate"]
        return EXIT_CHECK, report
    rel = check_relations(q)
    report["heisenberg-relations"] = rel.to_dict()
    report["passed"] = rel.passed
    report["failed_checks"] = [] if rel.passed else ["heisenberg-relations"]
    return (EXIT_OK if rel.passed else EXIT_CHECK), report


def cmd_decompose(args) -> tuple[int, dict]:
    q = quartet_from_dict(load_json(args.input))
    if args.genus is not None:
        from dataclasses import replace

        q = replace(q, genus=args.genus)
    report = {"command": "decompose"}
    try:
        cert = decompose(q)
    except CheckFailure as exc:
        report.update(passed=False, failed_checks=[exc.check], failure=_failure(exc))
        return EXIT_CHECK, report
    report["W"] = cert.W.to_dict()
    report["free-module-basis"] = {
        "check": "free-module-basis",
        "passed": True,
        "slices": cert.to_dict()["slices"],
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        D = d_grading(q, check=False)
    report["d_graded"] = D.to_json()
    report["d_grading_warnings"] = [str(w.message) for w in caught]
    report["duality"] = {"check": "duality", "holds": check_duality(D)}

    N = q.truncation
    predicted = hilb_from_d(D, N)
    actual = PoincareFamily(tuple(tuple(q.space.poincare(n)) for n in range(N + 1)))
    levels = {
        str(n): {"from_W": list(predicted.polys[n]), "from_space": list(actual.polys[n]),
                 "holds": predicted.polys[n] == actual.polys[n]}
        for n in range(N + 1)
    }
    mac_ok = all(v["holds"] for v in levels.values())
    report["macdonald-identity"] = {"check": "macdonald-identity", "passed": mac_ok, "levels": levels}

    failed = [] if mac_ok else ["macdonald-identity"]
    try:
        stab = stabilization_check(q, D.genus, check=False)
        report["kernel-stabilization"] = stab.to_dict()
        if not stab.passed:
            failed.append("kernel-stabilization")
    except CheckFailure as exc:
        report["kernel-stabilization"] = {"check": "kernel-stabilization", "skipped": str(exc)}
    report["passed"] = not failed
    report["failed_checks"] = failed
    return (EXIT_CHECK if failed else EXIT_OK), report


def _model_N(model: dict, args) -> int:
    N = args.truncation if args.truncation is not None else model.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N < 0:
        raise FormatError("model needs a non-negative integer N")
    return N


def cmd_curve(args) -> tuple[int, dict]:
    model = load_json(args.input)
    if not isinstance(model, dict) or "type" not in model:
        raise FormatError("model spec must be an object with a 'type'")
    kind = model["type"]
    N = _model_N(model, args)
    out: dict[str, dict] = {}
    if kind in ("semigroup", "node"):
        if N > DEFAULT_COLENGTH_CAP and not args.force:
            raise Refused(f"colength {N} exceeds enumeration cap {DEFAULT_COLENGTH_CAP}; pass --force")
        if kind == "semigroup":
            gens = model.get("generators")
            if not isinstance(gens, list) or not all(isinstance(g, int) and not isinstance(g, bool) for g in gens):
                raise FormatError("semigroup model needs a list of integer generators")
            try:
                G = semigroup(gens)
            except ValueError as exc:
                raise FormatError(str(exc)) from None
            Z = rational_curve_euler(G, N, method=args.method, jobs=args.jobs)
        else:
            Z = rational_curve_euler("node", N)
        out["euler"] = Z.to_json()
    elif kind == "smooth":
        g = args.genus if args.genus is not None else model.get("genus")
        if not isinstance(g, int) or isinstance(g, bool) or g < 0:
            raise FormatError("smooth model needs a non-negative integer genus")
        P = smooth_poincare(g, N)
        out["poincare"] = P.to_json()
        out["euler"] = global_euler([], 2 - 2 * g, N).to_json()
    elif kind == "p1":
        q = p1_quartet(N)
        out["quartet"] = quartet_to_dict(q)
        out["poincare"] = smooth_poincare(0, N).to_json()
        out["euler"] = global_euler([], 2, N).to_json()
    else:
        raise FormatError(f"unknown model type {kind!r}")
    written = {}
    if args.output:
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, obj in out.items():
            path = outdir / f"{name}.json"
            dump_json(obj, path)
            written[name] = str(path)
    return EXIT_OK, {"command": "curve", "model": model, "N": N, "data": out, "files": written, "passed": True}


def cmd_bps(args) -> tuple[int, dict]:
    Z = EulerSeries.from_json(load_json(args.input))
    if args.genus is not None:
        Z = EulerSeries(Z.coeffs, args.genus, Z.g_tilde)
    if Z.g is None:
        raise FormatError("arithmetic genus g missing; pass --genus")
    rep = bps_pipeline(Z)
    report = {"command": "bps", **rep.to_dict()}
    report["failed_checks"] = sorted({c for c, _ in rep.failures})
    return (EXIT_OK if rep.passed else EXIT_CHECK), report


def cmd_macdonald(args) -> tuple[int, dict]:
    data = load_json(args.input)
    report = {"command": "macdonald", "direction": args.direction}
    if args.direction == "inv":
        P = PoincareFamily.from_json(data)
        if args.genus is None:
            raise FormatError("--genus is required for the inverse transform")
        try:
            D = d_from_hilb(P, args.genus)
        except CheckFailure as exc:
            report.update(passed=False, failed_checks=[exc.check], failure=_failure(exc))
            return EXIT_CHECK, report
        result = D.to_json()
    else:
        D = DGradedPoly.from_json(data)
        if args.genus is not None and args.genus != D.genus:
            raise FormatError(f"--genus {args.genus} disagrees with file genus {D.genus}")
        N = args.truncation if args.truncation is not None else 2 * D.genus + 2
        result = hilb_from_d(D, N).to_json()
    report["result"] = result
    report["duality"] = {
        "check": "duality",
        "holds": check_duality(D),
        "violations": [slice_key(s) for s in duality_violations(D)],
    }
    report["euler"] = list(euler_specialize(D).coeffs) if not D.violations() else None
    report["passed"] = True
    report["failed_checks"] = []
    if args.output:
        dump_json(result, args.output)
    return EXIT_OK, report


def _detect(data) -> str:
    if not isinstance(data, dict):
        raise FormatError("top-level JSON must be an object")
    if "operators" in data:
        return "quartet"
    if "polys" in data:
        return "poincare"
    if "genus" in data and "coeffs" in data:
        return "dgraded"
    if "coeffs" in data:
        return "euler"
    raise FormatError("unrecognized file contents")


def cmd_report(args) -> tuple[int, dict]:
    """Run every applicable check on each input file."""
    entries = []
    code = EXIT_OK
    for path in args.input_list:
        kind = _detect(load_json(path))
        sub = argparse.Namespace(**vars(args))
        sub.input = path
        if kind == "quartet":
            c1, r1 = cmd_verify(sub)
            c2, r2 = cmd_decompose(sub) if c1 == EXIT_OK else (c1, None)
            parts = [r1] + ([r2] if r2 else [])
            c = max(c1, c2)
        elif kind == "euler":
            c, r = cmd_bps(sub)
            parts = [r]
        elif kind == "poincare":
            if sub.genus is None:
                raise FormatError(f"{path}: --genus is required for Poincare families")
            sub.direction = "inv"
            c, r = cmd_macdonald(sub)
            parts = [r]
        else:
            sub.direction = "fwd"
            c, r = cmd_macdonald(sub)
            parts = [r]
        failed = sorted({f for p in parts for f in p.get("failed_checks", [])})
        entries.append({"input": str(path), "kind": kind, "passed": c == EXIT_OK, "failed_checks": failed,
                        "reports": parts})
        code = max(code, c)
    return code, {"command": "report", "passed": code == EXIT_OK, "entries": entries,
                  "failed_checks": sorted({f for e in entries for f in e["failed_checks"]})}


COMMANDS = {
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "curve": cmd_curve,
    "bps": cmd_bps,
    "macdonald": cmd_macdonald,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _table(report: dict) -> str:
    lines = []

    def walk(prefix: str, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, list) and obj and all(isinstance(x, dict) for x in obj):
            for i, x in enumerate(obj):
                walk(f"{prefix}[{i}]", x)
        else:
            lines.append(f"{prefix}: {obj}")

    walk("", report)
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilbheis", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output_help="write the main result here"):
        sp.add_argument("--format", choices=("json", "table"), default="json")
        sp.add_argument("--output", help=output_help)
        sp.add_argument("--genus", type=int)
        sp.add_argument("--truncation", type=int)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--force", action="store_true")

    for name, helptext in [("verify", "validate a quartet and check the commutation relations"),
                           ("decompose", "lowest-weight space, D-grading and free-module certificate"),
                           ("bps", "BPS numbers from an Euler series, by both routes")]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--input", required=True)
        common(sp, "write the report here instead of stdout")

    sp = sub.add_parser("curve", help="generate data for a curve model")
    sp.add_argument("--input", required=True, help="model spec JSON")
    sp.add_argument("--method", choices=METHODS, default="subset", help="ideal enumerator")
    common(sp, "directory for the generated files")

    sp = sub.add_parser("macdonald", help="transform between Poincare families and D-graded polynomials")
    sp.add_argument("--input", required=True)
    sp.add_argument("--direction", choices=("fwd", "inv"), required=True)
    common(sp, "write the transformed object here")

    sp = sub.add_parser("report", help="run every applicable check on the given files")
    sp.add_argument("--input", action="append", dest="input_list", required=True)
    common(sp, "write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        code, report = COMMANDS[args.command](args)
    except (FormatError, Refused, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CheckFailure as exc:
        code, report = EXIT_CHECK, {"command": args.command, "passed": False, "failed_checks": [exc.check],
                                    "failure": _failure(exc)}
    text = _table(report) if args.format == "table" else dump_json(report)
    if args.output and args.command in ("verify", "decompose", "bps", "report"):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK:
        msgs = [f["message"] for f in report.get("failures", [])]
        if "failure" in report:
            msgs.append(report["failure"]["message"])
        detail = f" ({'; '.join(msgs)})" if msgs else ""
        print("check failed: " + ", ".join(report.get("failed_checks", [])) + detail, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
