"""Command-line surface.

Subcommands take JSON files (factorizations or complexes per the schema: 1
formats), run one pipeline each, and write deterministic JSON reports.
Exit codes: 0 success/PASS, 1 validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io_json
from .factorization import (
    signature,
    stability_rank_check,
    validate_hmf,
    validate_strong,
)
from .io_json import SchemaError
from .oracle import (
    CheckItem,
    check_regular_sequence,
    default_degree_bound,
    exactness_certificate,
    formula_suite,
)


def _threads(args):
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("HMF_THREADS", "1") or "1")


def _load_hmf(path):
    obj = io_json.load(path)
    from .factorization import HMF

    if not isinstance(obj, HMF):
        raise SchemaError(f"{path}: expected a factorization file")
    return obj


def _emit(args, payload):
    text = io_json.dumps(payload)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _maybe_tex(args, C):
    if getattr(args, "tex", None):
        with open(args.tex, "w") as fh:
            fh.write(io_json.complex_to_tex(C))


def cmd_validate(args):
    F = _load_hmf(args.file)
    rep = validate_hmf(F)
    ok_reg, reg_item = check_regular_sequence(F.ring, D=args.degree_bound)
    payload = {
        "schema": 1,
        "kind": "report",
        "verdict": "PASS" if rep.ok and ok_reg else "FAIL",
        "failures": rep.failures,
        "warnings": rep.warnings,
        "items": rep.items + [reg_item.row()],
        "signature": {
            "ranks": signature(F).ranks,
            "gamma": signature(F).gamma,
            "complexity": signature(F).complexity,
            "betti_degree": signature(F).betti_degree,
        },
    }
    _emit(args, payload)
    return 0 if rep.ok and ok_reg else 1


def cmd_resolve_s(args):
    from .resolutions import build_finite

    F = _load_hmf(args.file)
    rep = validate_hmf(F)
    if not rep.ok:
        raise SchemaError(f"{args.file}: invalid factorization: {rep.failures[:1]}")
    bundle = build_finite(F)
    L = bundle.complex
    cert = exactness_certificate(L, (1, L.hi), args.degree_bound,
                                 threads=_threads(args))
    print("betti:", " ".join(str(r) for r in L.betti_list()))
    _maybe_tex(args, L)
    payload = io_json.complex_to_json(L, provenance="finite")
    payload["exactness"] = cert.row()
    _emit(args, payload)
    return 0 if cert.verdict == "PASS" else 1


def cmd_resolve_r(args):
    from .resolutions import build_infinite

    F = _load_hmf(args.file)
    rep = validate_hmf(F)
    if not rep.ok:
        raise SchemaError(f"{args.file}: invalid factorization: {rep.failures[:1]}")
    bundle = build_infinite(F, args.steps)
    T = bundle.complex
    cert = exactness_certificate(T, (1, T.hi - 1), args.degree_bound,
                                 threads=_threads(args))
    print("betti:", " ".join(str(r) for r in T.betti_list()))
    _maybe_tex(args, T)
    payload = io_json.complex_to_json(T, provenance="quotient-tower",
                                      weights=bundle.weights)
    payload["exactness"] = cert.row()
    _emit(args, payload)
    return 0 if cert.verdict == "PASS" else 1


def cmd_intermediate(args):
    from .resolutions import build_intermediate

    F = _load_hmf(args.file)
    bundle = build_intermediate(F, args.j, args.steps)
    Q = bundle.complex
    cert = exactness_certificate(Q, (1, Q.hi - 1), args.degree_bound,
                                 threads=_threads(args))
    print("betti:", " ".join(str(r) for r in Q.betti_list()))
    _maybe_tex(args, Q)
    payload = io_json.complex_to_json(Q, provenance="intermediate")
    payload["exactness"] = cert.row()
    _emit(args, payload)
    return 0 if cert.verdict == "PASS" else 1


def cmd_shamash(args):
    from .resolutions import build_infinite

    F = _load_hmf(args.file)
    bundle = build_infinite(F, args.steps)
    stage = bundle.stages.get(args.p) if bundle.stages else None
    if stage is None:
        stage = bundle
    T = stage.complex
    print("betti:", " ".join(str(r) for r in T.betti_list()))
    _maybe_tex(args, T)
    _emit(args, io_json.complex_to_json(T, provenance="divided-power",
                                        weights=stage.weights))
    return 0


def cmd_box(args):
    from .lifting import higher_homotopies
    from .resolutions import box, box_homotopy_failures, build_finite

    F = _load_hmf(args.file)
    fin = build_finite(F)
    L = fin.complex
    f_idx = args.f_index if args.f_index is not None else F.c
    sigma = higher_homotopies(L, (f_idx,), 2)
    theta = {i: sigma.get((1,), i) for i in range(0, 4)}
    tau = {i: sigma.get((2,), i) for i in range(0, 2)}
    bundle = box(L, f_idx, theta, tau)
    fails = box_homotopy_failures(bundle)
    cert = exactness_certificate(bundle.complex, (1, bundle.complex.hi),
                                 args.degree_bound, threads=_threads(args))
    payload = io_json.complex_to_json(bundle.complex, provenance="box")
    payload["homotopy_failures"] = fails
    payload["exactness"] = cert.row()
    _maybe_tex(args, bundle.complex)
    _emit(args, payload)
    return 0 if not fails and cert.verdict == "PASS" else 1


def cmd_peel(args):
    from .resolutions import build_infinite, peel

    F = _load_hmf(args.file)
    p = args.p if args.p is not None else F.c
    bundle = build_infinite(F, args.steps)
    stage = bundle.stages.get(p) if bundle.stages else bundle
    pr = peel(stage.complex, t=stage.ci.get(p) or None)
    payload = io_json.complex_to_json(pr.kernel, provenance="peeled")
    payload["report"] = pr.report
    _emit(args, payload)
    return 0 if not pr.report else 1


def cmd_extract(args):
    from .extract import SyzygyInput, check_prestable, extract_hmf
    from .resolutions import build_infinite, cosyz_tower

    obj = io_json.load(args.file)
    from .factorization import HMF

    if isinstance(obj, HMF):
        steps = args.steps or (2 * obj.c + 4)
        tower = build_infinite(obj, steps)
        vw = cosyz_tower(obj, steps, tower=tower)
        _, W = vw[obj.c]
        inp = SyzygyInput(W.complex, args.syzygy)
    else:
        inp = SyzygyInput(obj, args.syzygy)
    rep = check_prestable(inp)
    if not rep.ok:
        payload = {"schema": 1, "kind": "report", "verdict": "FAIL",
                   "failures": rep.failures, "items": rep.items}
        _emit(args, payload)
        return 1
    out, trace = extract_hmf(inp)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(io_json.dumps(trace.as_json()))
    _emit(args, io_json.hmf_to_json(out))
    return 0


def cmd_strengthen(args):
    from .extract import strengthen

    F = _load_hmf(args.file)
    S = strengthen(F)
    rep = validate_strong(S)
    payload = io_json.hmf_to_json(S)
    payload["strong_report"] = {
        "failures": rep.failures,
        "items": rep.items,
    }
    _emit(args, payload)
    return 0 if rep.ok else 1


def cmd_suite(args):
    F = _load_hmf(args.file)
    rep = validate_hmf(F)
    rows = []
    reg_ok, reg_item = check_regular_sequence(F.ring, D=args.degree_bound)
    rows.append(reg_item)
    rows.append(
        CheckItem("factorization axioms", [], rep.failures,
                  "PASS" if rep.ok else "FAIL")
    )
    if rep.ok:
        rows.extend(
            formula_suite(F, steps=args.steps, D=args.degree_bound,
                          threads=_threads(args))
        )
    payload = io_json.report_rows_to_json(rows)
    _emit(args, payload)
    if args.junit:
        with open(args.junit, "w") as fh:
            fh.write(io_json.report_rows_to_junit(rows))
    if not rep.ok or not reg_ok:
        return 1
    if args.strict_stability:
        stab = stability_rank_check(F)
        if not stab.ok:
            return 1
    return 0


def cmd_gen_random(args):
    from .randgen import gen_random_hmf

    F = gen_random_hmf(args.seed, c=args.c, max_rank=args.max_rank,
                       gamma=args.gamma)
    _emit(args, io_json.hmf_to_json(F))
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="hmf",
        description="Exact higher matrix factorization toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, steps_default=None):
        p.add_argument("-o", "--output", help="write JSON output here")
        p.add_argument("--tex", help="write a TeX arrow diagram here")
        p.add_argument("--degree-bound", type=int, default=None,
                       help="internal degree bound for certificates")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel cells for the verifier "
                            "(default: HMF_THREADS or 1)")
        if steps_default is not None:
            p.add_argument("--steps", type=int, default=steps_default)

    p = sub.add_parser("validate", help="check the factorization axioms")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("resolve-s", help="finite resolution over the base ring")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_resolve_s)

    p = sub.add_parser("resolve-r", help="truncated resolution over the quotient")
    p.add_argument("file")
    common(p, steps_default=9)
    p.set_defaults(func=cmd_resolve_r)

    p = sub.add_parser("intermediate", help="resolution over a partial quotient")
    p.add_argument("file")
    p.add_argument("--j", type=int, required=True)
    common(p, steps_default=8)
    p.set_defaults(func=cmd_intermediate)

    p = sub.add_parser("shamash", help="divided-power stage of the tower")
    p.add_argument("file")
    p.add_argument("--p", type=int, default=None)
    common(p, steps_default=8)
    p.set_defaults(func=cmd_shamash)

    p = sub.add_parser("box", help="box complex of the finite resolution")
    p.add_argument("file")
    p.add_argument("--f-index", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_box)

    p = sub.add_parser("peel", help="invert the divided-power construction")
    p.add_argument("file")
    p.add_argument("--p", type=int, default=None)
    common(p, steps_default=8)
    p.set_defaults(func=cmd_peel)

    p = sub.add_parser("extract", help="extract a factorization from syzygy data")
    p.add_argument("file")
    p.add_argument("--syzygy", type=int, default=2)
    p.add_argument("--trace", help="write the extraction trace here")
    common(p, steps_default=None)
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("strengthen", help="upgrade h to exact homotopy data")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_strengthen)

    p = sub.add_parser("suite", help="run every formula and certificate check")
    p.add_argument("file")
    p.add_argument("--strict-stability", action="store_true")
    p.add_argument("--junit", help="write a JUnit XML report here")
    common(p, steps_default=8)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("gen-random", help="generate a random valid factorization")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--max-rank", type=int, default=3)
    p.add_argument("--gamma", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_gen_random)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
