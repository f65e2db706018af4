"""Versioned JSON schemas (schema: 1) and the TeX emitter.

Polynomials serialize as strings in the fixed grammar (`coef*var^e*...`
terms joined by + and -, graded-reverse-lexicographic order); rings,
complexes, and factorizations as JSON objects.  Serialization is
deterministic: dictionaries are dumped with sorted keys.
"""

from __future__ import annotations

import json

from .complexes import Complex, FreeModule, MatrixMap
from .factorization import HMF
from .ring import Field, GradedRing, RingError


class SchemaError(ValueError):
    pass


def _require(cond, where, msg):
    if not cond:
        raise SchemaError(f"{where}: {msg}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def ring_to_json(ring):
    return {
        "schema": 1,
        "field": ring.field.char,
        "vars": [[n, d] for n, d in zip(ring.var_names, ring.var_degs)],
        "regseq": [str(f) for f in ring.regseq],
    }


def ring_from_json(obj, where="ring"):
    _require(isinstance(obj, dict), where, "expected an object")
    _require(obj.get("schema") == 1, where, "unsupported schema")
    try:
        field = Field(obj["field"])
        ring = GradedRing(field, [(n, d) for n, d in obj["vars"]])
        ring.set_regseq([str(s) for s in obj["regseq"]])
    except (KeyError, RingError, TypeError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    return ring


def matrix_to_rows(mm):
    return [[str(q) for q in row] for row in mm.entries]


def complex_to_json(C, provenance=None, weights=None):
    obj = {
        "schema": 1,
        "kind": "complex",
        "ring": ring_to_json(C.ring),
        "level": C.level,
        "range": [C.lo, C.hi],
        "modules": [
            {
                "twists": list(C.module(i).twists),
                "labels": list(C.module(i).all_labels()),
            }
            for i in range(C.lo, C.hi + 1)
        ],
        "diffs": [
            matrix_to_rows(C.diff(i)) for i in range(C.lo + 1, C.hi + 1)
        ],
    }
    if provenance:
        obj["provenance"] = provenance
    if weights:
        obj["weights"] = {str(k): list(v) for k, v in weights.items()}
    return obj


def complex_from_json(obj, where="complex"):
    _require(isinstance(obj, dict), where, "expected an object")
    _require(obj.get("schema") == 1, where, "unsupported schema")
    _require(obj.get("kind") == "complex", where, "kind must be 'complex'")
    ring = ring_from_json(obj["ring"], where + ".ring")
    lo, hi = obj["range"]
    mods = {}
    for k, m in enumerate(obj["modules"]):
        mods[lo + k] = FreeModule(tuple(m["twists"]), tuple(m.get("labels") or ()) or None)
    level = int(obj["level"])
    _require(0 <= level <= ring.codim, where, "level out of range")
    diffs = {}
    for k, rows in enumerate(obj["diffs"]):
        i = lo + 1 + k
        try:
            diffs[i] = MatrixMap.from_strings(
                ring, mods[i], mods[i - 1], rows, level=level
            )
        except Exception as exc:
            raise SchemaError(f"{where}.diffs[{k}]: {exc}") from exc
    return Complex(ring, level, mods, diffs, lo, hi)


def hmf_to_json(F):
    d_blocks = {}
    for q in range(0 if F.generalized else 1, F.c + 1):
        for qp in range(0 if F.generalized else 1, q + 1):
            blk = F.d.submatrix(
                list(range(F.off0(qp), F.off0(qp) + F.rank0(qp))),
                list(range(F.off1(q), F.off1(q) + F.rank1(q))),
            )
            if blk.src.rank and blk.dst.rank:
                d_blocks[f"{q}->{qp}"] = matrix_to_rows(blk)
    h_blocks = {
        str(p): matrix_to_rows(F.h[p]) for p in range(1, F.c + 1)
    }
    obj = {
        "schema": 1,
        "kind": "hmf",
        "ring": ring_to_json(F.ring),
        "c": F.c,
        "B": [
            {
                "p": p,
                "B1": list(F.b1[p].twists),
                "B0": list(F.b0[p].twists),
            }
            for p in range(0 if F.generalized else 1, F.c + 1)
        ],
        "d_blocks": d_blocks,
        "h_blocks": h_blocks,
        "flags": {
            "generalized": F.generalized,
            "strong": bool(F.strong_ext),
        },
    }
    if F.strong_ext:
        ext = {}
        for p, blocks in F.strong_ext.items():
            ext[str(p)] = {
                f"{i},{w}": matrix_to_rows(blk) for (i, w), blk in blocks.items()
            }
        obj["strong_ext"] = ext
    return obj


def hmf_from_json(obj, where="hmf"):
    _require(isinstance(obj, dict), where, "expected an object")
    _require(obj.get("schema") == 1, where, "unsupported schema")
    _require(obj.get("kind") == "hmf", where, "kind must be 'hmf'")
    ring = ring_from_json(obj["ring"], where + ".ring")
    c = int(obj["c"])
    flags = obj.get("flags") or {}
    generalized = bool(flags.get("generalized"))
    b1 = {}
    b0 = {}
    for rec in obj["B"]:
        p = int(rec["p"])
        b1[p] = FreeModule(tuple(rec["B1"]))
        b0[p] = FreeModule(tuple(rec["B0"]))
    rank1 = {p: b1.get(p, FreeModule(())).rank for p in range(0, c + 1)}
    rank0 = {p: b0.get(p, FreeModule(())).rank for p in range(0, c + 1)}
    off1 = {p: sum(rank1[q] for q in range(0, p)) for p in range(0, c + 2)}
    off0 = {p: sum(rank0[q] for q in range(0, p)) for p in range(0, c + 2)}
    n1 = sum(rank1.values())
    n0 = sum(rank0.values())
    z = "0"
    rows = [[z] * n1 for _ in range(n0)]
    for key, blk in (obj.get("d_blocks") or {}).items():
        try:
            qs, qps = key.split("->")
            q, qp = int(qs), int(qps)
        except ValueError as exc:
            raise SchemaError(f"{where}.d_blocks[{key}]: bad key") from exc
        _require(qp <= q, f"{where}.d_blocks[{key}]", "filtration violated")
        _require(
            len(blk) == rank0[qp] and all(len(r) == rank1[q] for r in blk),
            f"{where}.d_blocks[{key}]",
            "block shape mismatch",
        )
        for i, r in enumerate(blk):
            for j, s in enumerate(r):
                rows[off0[qp] + i][off1[q] + j] = s
    d = [[ring.poly(s) for s in row] for row in rows]
    h = {}
    for p in range(1, c + 1):
        rowsh = (obj.get("h_blocks") or {}).get(str(p))
        _require(rowsh is not None, where, f"missing h block {p}")
        h[p] = [[ring.poly(s) for s in row] for row in rowsh]
    try:
        F = HMF(ring, b1, b0, d, h, generalized=generalized, c=c)
    except Exception as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    ext_obj = obj.get("strong_ext")
    if ext_obj:
        ext_all = {}
        for ps, blocks in ext_obj.items():
            p = int(ps)
            ext = {}
            for key, rowsb in blocks.items():
                i, w = (int(x) for x in key.split(","))
                ext[(i, w)] = MatrixMap(
                    ring,
                    F.A0(p),
                    F.b0[w],
                    [[ring.poly(s) for s in row] for row in rowsb],
                    0,
                    ring.fdeg(p) - ring.fdeg(i),
                    check=False,
                )
            ext_all[p] = ext
        F.strong_ext = ext_all
    return F


def load(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind == "hmf":
        return hmf_from_json(obj, where=path)
    if kind == "complex":
        return complex_from_json(obj, where=path)
    raise SchemaError(f"{path}: unknown kind {kind!r}")


def save(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


# ---------------------------------------------------------------------------
# TeX arrow diagrams


def complex_to_tex(C, name="F"):
    lines = [r"\["]
    arrows = []
    for i in range(C.hi, C.lo, -1):
        mat = C.diff(i)
        body = r" \\ ".join(
            " & ".join(_tex_poly(str(q)) for q in row) for row in mat.entries
        )
        arrows.append(
            rf"{name}_{{{i}}} \xrightarrow{{\begin{{pmatrix}}{body}\end{{pmatrix}}}}"
        )
    tail = rf"{name}_{{{C.lo}}}"
    lines.append(" ".join(arrows + [tail]))
    lines.append(r"\]")
    return "\n".join(lines)


def _tex_poly(s):
    return s.replace("*", r"\,").replace("^", r"^")


# ---------------------------------------------------------------------------
# Report rendering


def report_rows_to_json(rows):
    return {"schema": 1, "kind": "report", "rows": [r.row() for r in rows]}


def report_rows_to_junit(rows, suite="hmf"):
    import xml.etree.ElementTree as ET

    failures = sum(1 for r in rows if r.verdict == "FAIL")
    root = ET.Element(
        "testsuite",
        name=suite,
        tests=str(len(rows)),
        failures=str(failures),
    )
    for r in rows:
        case = ET.SubElement(root, "testcase", name=r.item)
        if r.verdict == "FAIL":
            f = ET.SubElement(case, "failure", message="check failed")
            f.text = f"expected={r.expected!r} computed={r.computed!r}"
        elif r.verdict == "N-A":
            ET.SubElement(case, "skipped")
    return ET.tostring(root, encoding="unicode")
