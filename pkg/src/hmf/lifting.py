"""Degreewise lifting and homotopy solvers.

Every existence statement used by the resolution builders (chain-map
extensions across Koszul complexes, homotopies for multiplication by f,
systems of higher homotopies, CI operators from a lifting, homotopy
comparison maps) reduces to solving  d X = C  modulo a prefix ideal, one
homological degree at a time.  Gradedness forces the degrees of all
unknowns, so each step is a finite linear system; solutions are chosen
deterministically (first pivot, free variables zero) and re-substituted
into their defining equations before being returned.
"""

from __future__ import annotations

import itertools

from .complexes import (
    HomotopySystem,
    MatrixMap,
    ShapeError,
    koszul_tensor,
    lift_through,
    multi_indices,
    solve_factorization,
)


class Obstruction(ValueError):
    """A degreewise system had no solution; carries the failing spot."""

    def __init__(self, kind, degree, detail=""):
        self.kind = kind
        self.degree = degree
        msg = f"{kind}: unsolvable at homological degree {degree}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class SolverBug(AssertionError):
    pass


def _recheck(kind, lhs, rhs=None, level=None):
    diff = lhs if rhs is None else lhs - rhs
    bad = diff.first_nonmember(level)
    if bad is not None:
        raise SolverBug(f"{kind}: defining equation fails at entry {bad}")


def nullhomotopy(W, Y, a, gamma, variant=0):
    """Homotopy alpha with gamma = dY alpha - (-1)^(a+1) alpha dW.

    gamma is a chain map W[a] -> Y given as {i: MatrixMap W_{i-a} -> Y_i}.
    Returns {i: MatrixMap W_{i-a-1} -> Y_i}.  Raises Obstruction when a
    degreewise system is inconsistent (gamma is not nullhomotopic in range).
    """
    if Y.level != W.level:
        raise ShapeError("level mismatch")
    sign = -1 if (a + 1) % 2 else 1  # (-1)^{a+1}
    alpha = {}
    spots = [i for i in sorted(gamma) if gamma[i] is not None]
    if not spots:
        return alpha
    shift = gamma[spots[0]].shift

    def alpha_at(i):
        got = alpha.get(i)
        if got is not None:
            return got
        return MatrixMap.zero(Y.ring, W.module(i - a - 1), Y.module(i), Y.level, shift)

    for i in range(min(spots), max(spots) + 1):
        if W.module(i - a).rank == 0:
            continue
        g = gamma.get(i)
        if g is None:
            g = MatrixMap.zero(Y.ring, W.module(i - a), Y.module(i), Y.level, shift)
        C = g + alpha_at(i).compose(W.diff(i - a)).scale(sign)
        if Y.module(i + 1).rank == 0:
            if not C.in_ideal():
                raise Obstruction("nullhomotopy", i, "residual above the top")
            continue
        X = lift_through(Y.diff(i + 1), C, Y.level, variant=variant)
        if X is None:
            raise Obstruction("nullhomotopy", i)
        _recheck("nullhomotopy", Y.diff(i + 1).compose(X), C, Y.level)
        alpha[i + 1] = X
    return alpha


def homotopy_for(C, f_index, hom_hi=None, start0=None, variant=0):
    """sigma with d sigma + sigma d = f_{f_index} on the resolution C.

    Returns {m: MatrixMap C_m -> C_{m+1}} by source degree; start0, when
    given, prescribes sigma at source degree 0 and is verified rather than
    solved.  The consistency residual at the top of a truncation is not
    checked (nothing above to map to).
    """
    ring = C.ring
    f = ring.regseq[f_index - 1]
    hom_hi = C.hi if hom_hi is None else hom_hi
    sigma = {}
    for m in range(C.lo, hom_hi + 1):
        src = C.module(m)
        if src.rank == 0:
            continue
        target = MatrixMap.poly_times_identity(ring, f, src, C.level)
        if m - 1 >= C.lo and C.module(m - 1).rank:
            prev = sigma.get(m - 1)
            if prev is None:
                raise Obstruction("homotopy", m - 1, "missing lower step")
            target = target - prev.compose(C.diff(m))
        if m == 0 and start0 is not None:
            X = start0
            _recheck("homotopy start", C.diff(m + 1).compose(X), target, C.level)
        elif C.module(m + 1).rank == 0:
            if m < hom_hi and not target.in_ideal():
                raise Obstruction("homotopy", m, f"f_{f_index} residual above top")
            continue
        else:
            X = lift_through(C.diff(m + 1), target, C.level, variant=variant)
            if X is None:
                raise Obstruction("homotopy", m, f"f_{f_index}")
            _recheck("homotopy", C.diff(m + 1).compose(X), target, C.level)
        sigma[m] = X
    return sigma


def higher_homotopies(G, findices, max_total, hom_hi=None, start=None, variant=0):
    """System of higher homotopies for the f_j, j in findices, on G.

    Built by the inductive recursion
        d sigma_a = (f_i Id when |a| = 1) - sum_{b+s=a, b != 0} sigma_b sigma_s
    ordered by |a| and then by source degree; the sum's b = a term feeds in
    sigma_a one source degree lower.  start, a {(a, m): MatrixMap} dict, may
    prescribe maps which are then verified rather than solved.
    """
    ring = G.ring
    findices = tuple(findices)
    c = len(findices)
    hom_hi = G.hi if hom_hi is None else hom_hi
    sigma = HomotopySystem(G, findices)
    start = dict(start or {})
    for total in range(1, max_total + 1):
        for a in multi_indices(c, total):
            for m in range(G.lo, hom_hi + 1):
                src = G.module(m)
                if src.rank == 0:
                    continue
                tgt_deg = m + 2 * total - 1
                acc = None
                if total == 1:
                    j = findices[a.index(1)]
                    acc = MatrixMap.poly_times_identity(
                        ring, ring.regseq[j - 1], src, G.level
                    )
                solvable = True
                for b in itertools.product(*(range(x + 1) for x in a)):
                    if all(v == 0 for v in b):
                        continue
                    s = tuple(x - y for x, y in zip(a, b))
                    first = sigma.get(s, m)
                    if first is None:
                        solvable = False
                        break
                    mid = m + 2 * sum(s) - 1
                    second = sigma.get(b, mid)
                    if second is None:
                        solvable = False
                        break
                    term = second.compose(first)
                    acc = term.scale(-1) if acc is None else acc - term
                if not solvable or acc is None:
                    continue
                prescribed = start.get((a, m))
                if G.module(tgt_deg).rank == 0:
                    if tgt_deg <= G.hi and not acc.in_ideal():
                        raise Obstruction(
                            "higher homotopy", m, f"index {a}: nothing above"
                        )
                    continue
                if tgt_deg > G.hi:
                    continue
                if prescribed is not None:
                    X = prescribed
                    _recheck(
                        f"higher homotopy start {a}",
                        G.diff(tgt_deg).compose(X),
                        acc,
                        G.level,
                    )
                else:
                    X = lift_through(G.diff(tgt_deg), acc, G.level, variant=variant)
                    if X is None:
                        raise Obstruction("higher homotopy", m, f"index {a}")
                    _recheck(
                        f"higher homotopy {a}", G.diff(tgt_deg).compose(X), acc, G.level
                    )
                sigma.set(a, m, X)
    return sigma


def koszul_extension(psi0, B, L, idxs, variant=0):
    """Koszul extension of psi across K(f_i, i in idxs) tensor B[-1] -> L.

    psi0: B_1 -> L_0 (the induced chain map of the two-term B has no other
    component).  Returns (KB, phi): KB = koszul_tensor(idxs, B) and phi the
    cone-ready components phi[j]: KB_{j+1} -> L_j, zero on K tensor B_0.
    The recursion solves d_L X_J = sum_r (-1)^r f_{J_r} X_{J minus J_r} per
    exterior monomial slot J; an unsolvable slot raises Obstruction naming J.
    """
    ring = L.ring
    KB = koszul_tensor(idxs, B, level=L.level)
    comp = KB.koszul_components
    b1 = B.module(1)

    def comp_modules(n):
        mods = []
        for J, s in comp[n]:
            extra = sum(ring.fdeg(j) for j in J)
            tag = "".join(f"e{j}" for j in J)
            tag = f"{tag}*" if tag else ""
            mods.append(B.module(s).shifted(extra, tag=tag))
        return mods

    blocks = {0: {(): psi0}}
    phi = {}
    for j in range(0, len(idxs) + 1):
        if j + 1 > KB.hi:
            break
        mods = comp_modules(j + 1)
        grid = [[None] * len(comp[j + 1])]
        if j > 0:
            blocks[j] = {}
        for k, (J, s) in enumerate(comp[j + 1]):
            if s != 1 or len(J) != j:
                continue
            if j == 0:
                grid[0][k] = blocks[0][()]
                continue
            acc = None
            for r, fj in enumerate(J):
                J2 = tuple(x for x in J if x != fj)
                prev = blocks[j - 1].get(J2)
                if prev is None:
                    continue
                sign = 1 if r % 2 == 0 else -1
                term = prev.scale_poly(ring.regseq[fj - 1].scale(sign))
                acc = term if acc is None else acc + term
            if acc is None:
                continue
            extra = sum(ring.fdeg(x) for x in J)
            src = b1.shifted(extra, tag="".join(f"e{x}" for x in J) + "*")
            C = MatrixMap(ring, src, L.module(j - 1), acc.entries, L.level, 0, check=False)
            if L.module(j).rank == 0:
                if not C.in_ideal():
                    raise Obstruction("koszul extension", j, f"slot e_{J}")
                continue
            X = lift_through(L.diff(j), C, L.level, variant=variant)
            if X is None:
                raise Obstruction("koszul extension", j, f"slot e_{J}")
            _recheck(f"koszul extension {J}", L.diff(j).compose(X), C, L.level)
            blocks[j][J] = X
            grid[0][k] = X
        phi[j] = MatrixMap.from_blocks(ring, grid, mods, [L.module(j)], L.level)
    return KB, phi


def ci_from_lifting(C, upto=None, variant=0):
    """CI operators from the stored lifting: solve d~^2 = sum f_j t~_j.

    Returns (tilde, failures): tilde[j][i]: C_i -> C_{i-2} with internal
    shift -deg f_j for 1 <= j <= C.level, and the list of failures of
    [t_j, d] = 0 modulo the level ideal (guaranteed empty for a regular
    sequence; verified anyway).
    """
    ring = C.ring
    level = C.level
    upto = C.hi if upto is None else upto
    if level == 0:
        raise ShapeError("ci operators need level >= 1")
    tilde = {j: {} for j in range(1, level + 1)}
    for i in range(C.lo + 2, upto + 1):
        sq = C.diff(i - 1).compose(C.diff(i))
        got = solve_factorization(None, sq, level, variant=variant)
        if got is None:
            raise Obstruction("ci decomposition", i, "d^2 not in the ideal")
        _, Ws = got
        acc = None
        for j in range(1, level + 1):
            term = Ws[j - 1].scale_poly(ring.regseq[j - 1])
            acc = term if acc is None else acc + term
        _recheck("ci decomposition", acc, sq, 0)
        for j in range(1, level + 1):
            tilde[j][i] = Ws[j - 1]
    failures = []
    for j in range(1, level + 1):
        for i in sorted(tilde[j]):
            if i - 1 in tilde[j] and C.module(i - 3).rank and C.module(i).rank:
                comm = C.diff(i - 2).compose(tilde[j][i]) - tilde[j][i - 1].compose(
                    C.diff(i)
                )
                if not comm.in_ideal():
                    failures.append(f"[t_{j}, d] != 0 at degree {i}")
    return tilde, failures


def homotopy_comparison(phi0, sigma, sigmap, max_m, variant=0):
    """Comparison maps between two higher homotopy systems for one element.

    phi0: chain map {v: MatrixMap G_v -> G'_v} covering a map of the resolved
    modules; sigma, sigmap: HomotopySystem objects with a single f index on
    G and G'.  Returns {j: {v: MatrixMap G_v -> G'_{v+2j}}} such that
    sum_{i+j=m} (sigma'_i phi_j - phi_j sigma_i) = 0 for all m <= max_m,
    solved by the inductive recursion of that identity.
    """
    G = sigma.complex
    Gp = sigmap.complex
    ring = G.ring

    def sig(table, i, v):
        return table.get((i,), v)

    phis = {0: dict(phi0)}
    for m in range(1, max_m + 1):
        phis[m] = {}
        for v in range(G.lo, G.hi + 1):
            if G.module(v).rank == 0:
                continue
            tgt = v + 2 * m
            if tgt - 1 > Gp.hi:
                continue
            acc = None
            ok = True
            # - sum_{i+j=m, i>0} sigma'_i phi_j
            for i in range(1, m + 1):
                j = m - i
                pj = phis[j].get(v)
                if pj is None:
                    if G.module(v).rank == 0:
                        continue
                    ok = False
                    break
                sp = sig(sigmap, i, v + 2 * j)
                if sp is None:
                    ok = False
                    break
                term = sp.compose(pj)
                acc = term.scale(-1) if acc is None else acc - term
            if not ok:
                continue
            # + sum_{i+j=m} phi_j sigma_i   (i = 0 term uses phi_m at v-1)
            for i in range(0, m + 1):
                j = m - i
                si = sig(sigma, i, v)
                if si is None:
                    ok = False
                    break
                mid = v + 2 * i - 1
                if j == m:
                    pj2 = phis[m].get(mid)
                    if pj2 is None:
                        if G.module(mid).rank == 0 or mid < G.lo:
                            continue
                        ok = False
                        break
                else:
                    pj2 = phis[j].get(mid)
                    if pj2 is None:
                        if G.module(mid).rank == 0:
                            continue
                        ok = False
                        break
                term = pj2.compose(si)
                acc = term if acc is None else acc + term
            if not ok or acc is None:
                continue
            if Gp.module(tgt).rank == 0:
                if tgt <= Gp.hi and not acc.in_ideal():
                    raise Obstruction("homotopy comparison", v, f"m={m}")
                continue
            X = lift_through(Gp.diff(tgt), acc, Gp.level, variant=variant)
            if X is None:
                raise Obstruction("homotopy comparison", v, f"m={m}")
            _recheck("homotopy comparison", Gp.diff(tgt).compose(X), acc, Gp.level)
            phis[m][v] = X
    return phis


def _phi_at(phis, sigma, sigmap, j, v, shift_unit):
    """phi_j at source degree v; zero map when either side vanishes."""
    G = sigma.complex
    Gp = sigmap.complex
    got = phis.get(j, {}).get(v)
    if got is not None:
        return got
    src = G.module(v)
    dst = Gp.module(v + 2 * j)
    if src.rank == 0 or dst.rank == 0:
        return MatrixMap.zero(G.ring, src, dst, G.level, j * shift_unit)
    return None


def verify_comparison(phis, sigma, sigmap, max_m):
    """Check sum_{i+j=m}(sigma'_i phi_j - phi_j sigma_i) = 0 for m <= max_m.

    Returns (failures, checked): failure strings plus the number of (m, v)
    combinations genuinely verified.
    """
    G = sigma.complex
    Gp = sigmap.complex
    ring = G.ring
    q = ring.fdeg(sigma.findices[0])
    failures = []
    checked = 0
    for m in range(0, max_m + 1):
        for v in range(G.lo, G.hi + 1):
            if G.module(v).rank == 0:
                continue
            acc = None
            ok = True
            for i in range(0, m + 1):
                j = m - i
                pj = _phi_at(phis, sigma, sigmap, j, v, q)
                sp = sigmap.get((i,), v + 2 * j)
                if sp is None or pj is None:
                    ok = False
                    break
                term1 = sp.compose(pj)
                si = sigma.get((i,), v)
                if si is None:
                    ok = False
                    break
                mid = v + 2 * i - 1
                pj2 = _phi_at(phis, sigma, sigmap, j, mid, q)
                if pj2 is None:
                    ok = False
                    break
                term2 = pj2.compose(si)
                diff = term1 - term2
                acc = diff if acc is None else acc + diff
            if not ok or acc is None:
                continue
            checked += 1
            bad = acc.first_nonmember()
            if bad is not None:
                failures.append(f"comparison identity fails at m={m}, v={v}: {bad}")
    return failures, checked


def lifted_comparison_check(phis, sigma, sigmap, steps):
    """Assembled map of standard liftings commutes with the lifted
    differentials exactly over the base ring.

    Builds, per homological degree n <= steps, the block matrices
    delta~ = sum sigma_j, delta~' = sum sigma'_j, phi~ = sum phi_i on the
    divided-power modules, and checks delta~' phi~ = phi~ delta~ entrywise
    (exact equality of polynomials).  Returns failure strings.
    """
    G = sigma.complex
    Gp = sigmap.complex
    ring = G.ring
    q = ring.fdeg(sigma.findices[0])

    def layout(C, n):
        out = []
        for a in range(0, n // 2 + 1):
            m = n - 2 * a
            if C.lo <= m <= C.hi and C.module(m).rank:
                out.append((a, m))
        return out

    def modules(C, lay):
        return [C.module(m).shifted(a * q) for a, m in lay]

    def delta(C, table, n):
        src_l = layout(C, n)
        dst_l = layout(C, n - 1)
        dst_pos = {t: k for k, t in enumerate(dst_l)}
        blocks = [[None] * len(src_l) for _ in dst_l]
        for js, (a, m) in enumerate(src_l):
            for i in range(0, a + 1):
                kd = dst_pos.get((a - i, m + 2 * i - 1))
                if kd is None:
                    continue
                blk = table.get((i,), m)
                if blk is None:
                    return None
                blocks[kd][js] = blk.entries
        return MatrixMap.from_blocks(
            ring, blocks, modules(C, src_l), modules(C, dst_l), 0
        )

    def phimap(n):
        src_l = layout(G, n)
        dst_l = layout(Gp, n)
        dst_pos = {t: k for k, t in enumerate(dst_l)}
        blocks = [[None] * len(src_l) for _ in dst_l]
        for js, (a, m) in enumerate(src_l):
            for i in range(0, a + 1):
                kd = dst_pos.get((a - i, m + 2 * i))
                if kd is None:
                    continue
                blk = _phi_at(phis, sigma, sigmap, i, m, q)
                if blk is None:
                    return None
                blocks[kd][js] = blk.entries
        return MatrixMap.from_blocks(
            ring, blocks, modules(G, src_l), modules(Gp, dst_l), 0
        )

    failures = []
    for n in range(1, steps + 1):
        dG = delta(G, sigma, n)
        dGp = delta(Gp, sigmap, n)
        ph_n = phimap(n)
        ph_prev = phimap(n - 1)
        if None in (dG, dGp, ph_n, ph_prev):
            continue
        lhs = ph_prev.compose(dG)
        rhs = dGp.compose(ph_n)
        if not (lhs - rhs).is_zero():
            failures.append(f"lifted comparison fails at degree {n}")
    return failures
