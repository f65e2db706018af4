"""Degreewise linear algebra over graded free modules.

A homogeneous element of degree e in a free module with generator degrees
(twists) t_1..t_r is a vector whose k-th component is homogeneous of degree
e - t_k.  Fixing monomial bases of those graded pieces turns every
congruence  sum_i c_i g_i = target (mod ideal)  into one dense linear system
over the coefficient field.  All solvers here pick the first-pivot solution
with free variables set to zero, so results are reproducible bit for bit.
"""

from __future__ import annotations

from . import _kernels
from .ring import Poly, RingError


class SolveError(ValueError):
    pass


def _mon_index(ring, d):
    cache = getattr(ring, "_monidx_cache", None)
    if cache is None:
        cache = {}
        ring._monidx_cache = cache
    got = cache.get(d)
    if got is None:
        got = {m: i for i, m in enumerate(ring.monomials(d))}
        cache[d] = got
    return got


def piece_layout(ring, twists, e):
    """Row layout of the degree-e piece: (offsets, total_dim)."""
    offsets = []
    total = 0
    for tw in twists:
        offsets.append(total)
        total += len(ring.monomials(e - tw))
    return offsets, total


def vec_coords_into(ring, twists, e, vec, col, out, offsets):
    """Accumulate the coordinates of vec (deg-e vector) into out[:, col]."""
    fld = ring.field
    for k, q in enumerate(vec):
        if q is None or q.is_zero():
            continue
        idx = _mon_index(ring, e - twists[k])
        off = offsets[k]
        for expo, c in q.terms.items():
            row = idx.get(expo)
            if row is None:
                raise SolveError(
                    f"component {k} has a term of degree "
                    f"{ring.mono_degree(expo)}, expected {e - twists[k]}"
                )
            out[off + row, col] = fld.add(out[off + row, col], c)


def graded_solve(ring, dst_twists, e, slots, targets, variant=0):
    """Solve sum_i c_i * slot_i = target in the degree-e piece.

    slots: list of (vector over dst_twists, slot degree); the unknown c_i is
    homogeneous of degree e - slotdeg_i.  targets: list of vectors.  Returns,
    per target, either a list of coefficient Polys or None when unsolvable.

    variant = 0 picks the canonical first-pivot solution with zero free
    variables; any other value adds the first nullspace vector, giving a
    second deterministic representative whenever the solution is not unique.
    """
    fld = ring.field
    offsets, nrows = piece_layout(ring, dst_twists, e)
    col_slot = []
    col_mono = []
    for si in range(len(slots)):
        _, sdeg = slots[si]
        for m in ring.monomials(e - sdeg):
            col_slot.append(si)
            col_mono.append(m)
    ncols = len(col_slot)
    A = fld.zeros(nrows, ncols)
    for col in range(ncols):
        vec, _ = slots[col_slot[col]]
        shifted = [q.mono_shift(col_mono[col]) if q is not None else None for q in vec]
        vec_coords_into(ring, dst_twists, e, shifted, col, A, offsets)
    B = fld.zeros(nrows, len(targets))
    for j, tgt in enumerate(targets):
        vec_coords_into(ring, dst_twists, e, tgt, j, B, offsets)
    if nrows == 0:
        results = []
        for tgt in targets:
            if all(q is None or q.is_zero() for q in tgt):
                results.append([ring.zero() for _ in slots])
            else:
                results.append(None)
        return results
    ok, X = fld.solve_many(A, B)
    null_first = None
    if variant and ncols:
        N = fld.nullspace(A)
        if N.shape[1]:
            null_first = N[:, 0]
    results = []
    for j in range(len(targets)):
        if not bool(ok[j]):
            results.append(None)
            continue
        coeffs = [ring.zero() for _ in slots]
        for col in range(ncols):
            c = X[col, j]
            if null_first is not None:
                c = fld.add(c, null_first[col])
            if c != 0:
                si = col_slot[col]
                coeffs[si] = coeffs[si] + ring.monomial(col_mono[col], c)
        results.append(coeffs)
    return results


def graded_piece_solve(targets, gens, variant=0):
    """Spec surface: targets are homogeneous Polys of one degree e, gens are
    (Poly g_i, slot degree e_i); returns coefficient lists or None per target.
    """
    if not targets:
        return []
    ring = targets[0].ring
    for t in targets:
        if not t.is_homogeneous():
            raise SolveError("inhomogeneous target")
    for g, _ in gens:
        if not g.is_homogeneous():
            raise SolveError("inhomogeneous generator")
    degs = {t.degree() for t in targets if not t.is_zero()}
    if len(degs) > 1:
        raise SolveError("targets of mixed degrees")
    if not degs:
        return [[ring.zero() for _ in gens] for _ in targets]
    e = degs.pop()
    slots = [((g,), ed) for g, ed in gens]
    return graded_solve(ring, (0,), e, slots, [(t,) for t in targets], variant=variant)


# ---------------------------------------------------------------------------
# Ideal membership with cached echelon forms per graded piece.


def _ideal_echelon(ring, gens, e):
    """RREF of the degree-e piece of the ideal (gens) inside the ring."""
    key = (gens, e)
    got = ring._ideal_piece_cache.get(key)
    if got is not None:
        return got
    fld = ring.field
    nrows = len(ring.monomials(e))
    cols = []
    for g in gens:
        dg = g.degree()
        for m in ring.monomials(e - dg):
            cols.append(g.mono_shift(m))
    # rows of A are the spanning vectors, so membership is row reduction
    A = fld.zeros(len(cols), nrows)
    idx = _mon_index(ring, e)
    for row, q in enumerate(cols):
        for expo, c in q.terms.items():
            A[row, idx[expo]] = fld.add(A[row, idx[expo]], c)
    if fld.char:
        R, piv = _kernels.rref(A, fld.char)
    else:
        R, piv = _kernels.rref_frac(A)
    ring._ideal_piece_cache[key] = (R, piv)
    return R, piv


def homogeneous_in_ideal(g, gens):
    """Membership of a homogeneous g in the ideal generated by gens."""
    if g.is_zero():
        return True
    if not gens:
        return False
    ring = g.ring
    e = g.degree()
    R, piv = _ideal_echelon(ring, tuple(gens), e)
    fld = ring.field
    idx = _mon_index(ring, e)
    b = [fld.canon(0)] * len(idx)
    for expo, c in g.terms.items():
        b[idx[expo]] = c
    if fld.char:
        res = _kernels.in_row_space_complement(R, piv, b, fld.char)
        return not res.any()
    # characteristic zero: reduce manually
    v = list(b)
    for r0, c in enumerate(piv):
        f = v[c]
        if f != 0:
            v = [x - f * y for x, y in zip(v, R[r0])]
    return all(x == 0 for x in v)


def ideal_membership(g, level):
    """Is g in (f_1, ..., f_level)?  Complete for arbitrary g because the
    ideal is homogeneous: decided on each homogeneous component.
    """
    ring = g.ring
    if level < 0 or level > ring.codim:
        raise RingError(f"ideal level {level} out of range 0..{ring.codim}")
    gens = ring.regseq[:level]
    if g.is_zero():
        return True
    return all(
        homogeneous_in_ideal(part, gens) for part in g.homogeneous_parts().values()
    )
