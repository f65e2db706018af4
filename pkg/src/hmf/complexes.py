"""Graded free modules, homogeneous matrix maps, and chain complexes.

Complexes over a quotient S/(f_1..f_p) are represented by matrices over the
polynomial ring S together with the level p; every zero/equality test reads
entries modulo the prefix ideal via degreewise linear algebra.  Sign
conventions (tensor differential, shifts, cones) are fixed once and written
up in SIGN.md; `Complex.validate` enforces d^2 = 0 at the complex's level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graded import graded_solve, ideal_membership
from .ring import RingError


class ShapeError(ValueError):
    pass


class ContractViolation(ValueError):
    pass


@dataclass(frozen=True)
class FreeModule:
    """Graded free module given by its generator degrees (twists)."""

    twists: tuple
    labels: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "twists", tuple(int(t) for t in self.twists))
        if self.labels is not None:
            if len(self.labels) != len(self.twists):
                raise ShapeError("labels length mismatch")
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def rank(self):
        return len(self.twists)

    def label(self, k):
        return self.labels[k] if self.labels else f"g{k}"

    def all_labels(self):
        return tuple(self.label(k) for k in range(self.rank))

    def shifted(self, n, tag=None):
        labels = None
        if tag is not None:
            labels = tuple(f"{tag}{lab}" for lab in self.all_labels())
        elif self.labels is not None:
            labels = self.labels
        return FreeModule(tuple(t + n for t in self.twists), labels)

    @staticmethod
    def concat(mods):
        tw = tuple(itertools.chain.from_iterable(m.twists for m in mods))
        labels = tuple(itertools.chain.from_iterable(m.all_labels() for m in mods))
        return FreeModule(tw, labels)


ZERO_MODULE = FreeModule(())


class MatrixMap:
    """Homogeneous matrix between graded free modules, read at some level.

    entries[i][j] maps generator j of src into row i of dst and is zero or
    homogeneous of degree src.twists[j] + shift - dst.twists[i].  shift is
    the internal degree the map adds (0 for differentials, deg f for a
    homotopy of f, -deg f for a CI operator).
    """

    __slots__ = ("ring", "src", "dst", "entries", "level", "shift")

    def __init__(self, ring, src, dst, entries, level=0, shift=0, check=True):
        self.ring = ring
        self.src = src
        self.dst = dst
        self.entries = tuple(tuple(row) for row in entries)
        self.level = level
        self.shift = shift
        if len(self.entries) != dst.rank or any(
            len(row) != src.rank for row in self.entries
        ):
            raise ShapeError(
                f"entries shape {len(self.entries)}x"
                f"{len(self.entries[0]) if self.entries else 0}"
                f" does not match {dst.rank}x{src.rank}"
            )
        if check:
            self.check_homogeneous()

    # -- construction helpers

    @classmethod
    def zero(cls, ring, src, dst, level=0, shift=0):
        z = ring.zero()
        return cls(
            ring,
            src,
            dst,
            [[z] * src.rank for _ in range(dst.rank)],
            level,
            shift,
            check=False,
        )

    @classmethod
    def identity(cls, ring, module, level=0):
        rows = []
        one = ring.one()
        z = ring.zero()
        for i in range(module.rank):
            rows.append([one if i == j else z for j in range(module.rank)])
        return cls(ring, module, module, rows, level, 0, check=False)

    @classmethod
    def poly_times_identity(cls, ring, g, module, level=0):
        rows = []
        z = ring.zero()
        for i in range(module.rank):
            rows.append([g if i == j else z for j in range(module.rank)])
        return cls(ring, module, module, rows, level, g.degree() or 0, check=False)

    @classmethod
    def from_strings(cls, ring, src, dst, rows, level=0, shift=0):
        ent = [[ring.poly(s) if isinstance(s, str) else s for s in row] for row in rows]
        return cls(ring, src, dst, ent, level, shift)

    # -- degree bookkeeping

    def required_degree(self, i, j):
        return self.src.twists[j] + self.shift - self.dst.twists[i]

    def check_homogeneous(self):
        for i in range(self.dst.rank):
            for j in range(self.src.rank):
                q = self.entries[i][j]
                if q.is_zero():
                    continue
                if not q.is_homogeneous() or q.degree() != self.required_degree(i, j):
                    raise ContractViolation(
                        f"entry ({i},{j}) = {q} has degree {q.degree()}, "
                        f"required {self.required_degree(i, j)}"
                    )

    # -- algebra

    def _compat(self, other):
        if self.ring is not other.ring:
            raise RingError("maps over different rings")
        if self.level != other.level:
            raise ShapeError(f"level mismatch {self.level} != {other.level}")

    def compose(self, other):
        """self o other (other applied first)."""
        self._compat(other)
        if other.dst.twists != self.src.twists:
            raise ShapeError("composition twist mismatch")
        ring = self.ring
        z = ring.zero()
        rows = []
        for i in range(self.dst.rank):
            row = []
            for j in range(other.src.rank):
                acc = z
                for k in range(self.src.rank):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            rows.append(row)
        return MatrixMap(
            ring,
            other.src,
            self.dst,
            rows,
            self.level,
            self.shift + other.shift,
            check=False,
        )

    def __add__(self, other):
        self._compat(other)
        if (
            other.src.twists != self.src.twists
            or other.dst.twists != self.dst.twists
            or other.shift != self.shift
        ):
            raise ShapeError("sum shape mismatch")
        rows = [
            [a + b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.entries, other.entries)
        ]
        return MatrixMap(
            self.ring, self.src, self.dst, rows, self.level, self.shift, check=False
        )

    def __neg__(self):
        rows = [[-a for a in row] for row in self.entries]
        return MatrixMap(
            self.ring, self.src, self.dst, rows, self.level, self.shift, check=False
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        rows = [[a.scale(c) for a in row] for row in self.entries]
        return MatrixMap(
            self.ring, self.src, self.dst, rows, self.level, self.shift, check=False
        )

    def scale_poly(self, g):
        dg = g.degree() or 0
        rows = [[a * g for a in row] for row in self.entries]
        return MatrixMap(
            self.ring, self.src, self.dst, rows, self.level, self.shift + dg, check=False
        )

    def with_shift(self, shift):
        return MatrixMap(
            self.ring, self.src, self.dst, self.entries, self.level, shift, check=False
        )

    def with_level(self, level):
        if level < self.level:
            raise ShapeError("cannot decrease level")
        return self.relevel(level)

    def relevel(self, level):
        """Reinterpret the same S-matrix at any level (a choice of lifting
        when the level drops)."""
        return MatrixMap(
            self.ring, self.src, self.dst, self.entries, level, self.shift, check=False
        )

    def with_modules(self, src=None, dst=None):
        src = src if src is not None else self.src
        dst = dst if dst is not None else self.dst
        if src.twists != self.src.twists or dst.twists != self.dst.twists:
            raise ShapeError("relabel must preserve twists")
        return MatrixMap(
            self.ring, src, dst, self.entries, self.level, self.shift, check=False
        )

    def column(self, j):
        return tuple(self.entries[i][j] for i in range(self.dst.rank))

    def submatrix(self, row_idx, col_idx):
        src = FreeModule(
            tuple(self.src.twists[j] for j in col_idx),
            tuple(self.src.label(j) for j in col_idx),
        )
        dst = FreeModule(
            tuple(self.dst.twists[i] for i in row_idx),
            tuple(self.dst.label(i) for i in row_idx),
        )
        rows = [[self.entries[i][j] for j in col_idx] for i in row_idx]
        return MatrixMap(self.ring, src, dst, rows, self.level, self.shift, check=False)

    @staticmethod
    def from_blocks(ring, blocks, src_mods, dst_mods, level=0, shift=0):
        """Assemble a map from a grid of optional blocks.

        blocks[bi][bj] maps src_mods[bj] -> dst_mods[bi]; None means zero.
        """
        src = FreeModule.concat(src_mods)
        dst = FreeModule.concat(dst_mods)
        z = ring.zero()
        rows = [[z] * src.rank for _ in range(dst.rank)]
        roff = 0
        for bi, dmod in enumerate(dst_mods):
            coff = 0
            for bj, smod in enumerate(src_mods):
                blk = blocks[bi][bj]
                if blk is not None:
                    ent = blk.entries if isinstance(blk, MatrixMap) else blk
                    if len(ent) != dmod.rank or any(len(r) != smod.rank for r in ent):
                        raise ShapeError(f"block ({bi},{bj}) shape mismatch")
                    for i in range(dmod.rank):
                        for j in range(smod.rank):
                            rows[roff + i][coff + j] = ent[i][j]
                coff += smod.rank
            roff += dmod.rank
        return MatrixMap(ring, src, dst, rows, level, shift, check=False)

    # -- tests modulo the level ideal

    def is_zero(self):
        return all(q.is_zero() for row in self.entries for q in row)

    def first_nonmember(self, level=None):
        level = self.level if level is None else level
        for i, row in enumerate(self.entries):
            for j, q in enumerate(row):
                if not ideal_membership(q, level):
                    return (i, j)
        return None

    def in_ideal(self, level=None):
        return self.first_nonmember(level) is None

    def eq_mod(self, other, level=None):
        return (self - other).in_ideal(level)

    def is_minimal(self):
        """No unit entries: every degree-0 (scalar) entry vanishes."""
        for i in range(self.dst.rank):
            for j in range(self.src.rank):
                if self.required_degree(i, j) == 0 and not self.entries[i][j].is_zero():
                    return False
        return True

    def str_rows(self):
        return [[str(q) for q in row] for row in self.entries]

    def __repr__(self):
        return f"MatrixMap({self.dst.rank}x{self.src.rank}, level={self.level}, shift={self.shift})"


class Complex:
    """Chain complex of graded free modules over S read at a level.

    modules[i] for lo <= i <= hi; diffs[i]: modules[i] -> modules[i-1] for
    lo < i <= hi.  Modules outside the range are zero.
    """

    def __init__(self, ring, level, modules, diffs, lo=None, hi=None):
        self.ring = ring
        self.level = level
        self.modules = dict(modules)
        self.diffs = dict(diffs)
        keys = sorted(self.modules)
        self.lo = lo if lo is not None else (keys[0] if keys else 0)
        self.hi = hi if hi is not None else (keys[-1] if keys else 0)
        for i in range(self.lo, self.hi + 1):
            self.modules.setdefault(i, ZERO_MODULE)

    def module(self, i):
        return self.modules.get(i, ZERO_MODULE)

    def diff(self, i):
        got = self.diffs.get(i)
        if got is None:
            return MatrixMap.zero(
                self.ring, self.module(i), self.module(i - 1), self.level
            )
        return got

    def rank(self, i):
        return self.module(i).rank

    def ranks(self):
        return {i: self.rank(i) for i in range(self.lo, self.hi + 1)}

    def betti_list(self):
        return [self.rank(i) for i in range(self.lo, self.hi + 1)]

    def validate(self, check_squares=True):
        failures = []
        for i in range(self.lo + 1, self.hi + 1):
            d = self.diff(i)
            if d.src.twists != self.module(i).twists or d.dst.twists != self.module(
                i - 1
            ).twists:
                failures.append(f"diff {i}: module mismatch")
                continue
            try:
                d.check_homogeneous()
            except ContractViolation as exc:
                failures.append(f"diff {i}: {exc}")
        if check_squares:
            for i in range(self.lo + 2, self.hi + 1):
                sq = self.diff(i - 1).compose(self.diff(i))
                bad = sq.first_nonmember()
                if bad is not None:
                    failures.append(
                        f"d^2 != 0 at degree {i}, entry {bad}: {sq.entries[bad[0]][bad[1]]}"
                    )
        return failures

    def shift(self, a):
        """U[-a] convention: result_i = self_{i+a}, differential (-1)^a d."""
        sign = 1 if a % 2 == 0 else -1
        modules = {i - a: m for i, m in self.modules.items()}
        diffs = {}
        for i, d in self.diffs.items():
            diffs[i - a] = d if sign == 1 else -d
        return Complex(self.ring, self.level, modules, diffs, self.lo - a, self.hi - a)

    def truncate(self, lo, hi):
        if hi < lo:
            raise ShapeError("empty truncation range")
        modules = {
            i: self.module(i) for i in range(lo, hi + 1)
        }
        diffs = {i: self.diffs[i] for i in self.diffs if lo < i <= hi}
        return Complex(self.ring, self.level, modules, diffs, lo, hi)

    def reduce_level(self, q):
        if q < self.level:
            raise ShapeError("reduce_level must deepen the quotient")
        diffs = {i: d.with_level(q) for i, d in self.diffs.items()}
        return Complex(self.ring, q, self.modules, diffs, self.lo, self.hi)

    def twisted(self, n):
        """Add n to every generator degree (entries unchanged)."""
        modules = {i: m.shifted(n) for i, m in self.modules.items()}
        diffs = {
            i: MatrixMap(
                self.ring,
                modules[i],
                modules[i - 1],
                d.entries,
                self.level,
                d.shift,
                check=False,
            )
            for i, d in self.diffs.items()
        }
        return Complex(self.ring, self.level, modules, diffs, self.lo, self.hi)

    def is_minimal(self):
        return all(self.diff(i).is_minimal() for i in range(self.lo + 1, self.hi + 1))

    def __repr__(self):
        rk = " ".join(str(self.rank(i)) for i in range(self.lo, self.hi + 1))
        return f"Complex(level={self.level}, range=[{self.lo},{self.hi}], ranks {rk})"


def direct_sum(C1, C2):
    if C1.ring is not C2.ring or C1.level != C2.level:
        raise ShapeError("direct sum needs matching ring and level")
    lo, hi = min(C1.lo, C2.lo), max(C1.hi, C2.hi)
    modules = {}
    diffs = {}
    for i in range(lo, hi + 1):
        modules[i] = FreeModule.concat([C1.module(i), C2.module(i)])
    for i in range(lo + 1, hi + 1):
        diffs[i] = MatrixMap.from_blocks(
            C1.ring,
            [[C1.diff(i), None], [None, C2.diff(i)]],
            [C1.module(i), C2.module(i)],
            [C1.module(i - 1), C2.module(i - 1)],
            C1.level,
        )
    return Complex(C1.ring, C1.level, modules, diffs, lo, hi)


def mapping_cone(Y, W, phi, check=True):
    """Cone of a chain map W[-1] -> Y given by components phi[j]: W_{j+1} -> Y_j.

    Cone_i = Y_i + W_i with differential [[dY, phi], [0, dW]].
    """
    if Y.ring is not W.ring or Y.level != W.level:
        raise ShapeError("cone needs matching ring and level")
    ring = Y.ring
    if check:
        for j, p in phi.items():
            if p.src.twists != W.module(j + 1).twists or p.dst.twists != Y.module(j).twists:
                raise ContractViolation(f"phi[{j}] has wrong modules")
            p.check_homogeneous()
        for j in sorted(phi):
            lhs = Y.diff(j).compose(phi[j]) if j > Y.lo else None
            rhs = phi.get(j - 1)
            acc = None
            if lhs is not None:
                acc = lhs
            if rhs is not None:
                term = rhs.compose(W.diff(j + 1))
                acc = term if acc is None else acc + term
            if acc is not None and not acc.in_ideal():
                raise ContractViolation(
                    f"phi is not a chain map: square at degree {j} fails"
                )
    lo, hi = min(Y.lo, W.lo), max(Y.hi, W.hi)
    modules = {}
    diffs = {}
    for i in range(lo, hi + 1):
        modules[i] = FreeModule.concat([Y.module(i), W.module(i)])
    for i in range(lo + 1, hi + 1):
        blk = phi.get(i - 1)
        diffs[i] = MatrixMap.from_blocks(
            ring,
            [[Y.diff(i), blk], [None, W.diff(i)]],
            [Y.module(i), W.module(i)],
            [Y.module(i - 1), W.module(i - 1)],
            Y.level,
        )
    return Complex(ring, Y.level, modules, diffs, lo, hi)


def two_term_complex(ring, b, level=0):
    """The complex B_1 --b--> B_0 with B_1 in homological degree 1."""
    return Complex(
        ring, level, {0: b.dst, 1: b.src}, {1: b.with_level(level)}, 0, 1
    )


def koszul_components(idxs, n):
    """Ordered basis components (J, s) of (K(f_idxs) tensor B)_n."""
    comps = []
    for size in range(n - 1, n + 1):
        s = n - size
        if s not in (0, 1) or size < 0 or size > len(idxs):
            continue
        for J in itertools.combinations(idxs, size):
            comps.append((J, s))
    comps.sort(key=lambda js: (len(js[0]), js[0]))
    return comps


def koszul_tensor(idxs, B, level=None):
    """K(f_{i1},...,f_{im}) tensor B for a two-term complex B.

    Components of degree n are e_J tensor B_s with |J| + s = n; the Koszul
    part of the differential carries the sign (-1)^s, matching the fixed
    tensor convention.  Basis labels expose the exterior monomials.
    """
    ring = B.ring
    level = B.level if level is None else level
    idxs = tuple(idxs)
    b = B.diff(1)
    m = len(idxs)
    modules = {}
    diffs = {}
    comp_lists = {}
    for n in range(0, m + 2):
        comps = koszul_components(idxs, n)
        comp_lists[n] = comps
        mods = []
        for J, s in comps:
            extra = sum(ring.fdeg(j) for j in J)
            base = B.module(s)
            tag = "".join(f"e{j}" for j in J)
            tag = f"{tag}*" if tag else ""
            mods.append(base.shifted(extra, tag=tag))
        modules[n] = FreeModule.concat(mods) if mods else ZERO_MODULE
    for n in range(1, m + 2):
        src_comps = comp_lists[n]
        dst_comps = comp_lists[n - 1]
        dst_pos = {c: k for k, c in enumerate(dst_comps)}
        src_mods = _component_modules(ring, B, idxs, src_comps)
        dst_mods = _component_modules(ring, B, idxs, dst_comps)
        blocks = [[None] * len(src_comps) for _ in dst_comps]
        for jsrc, (J, s) in enumerate(src_comps):
            # Koszul part: (-1)^s sum_r (-1)^{r+1} f_{J_r} to (J minus J_r, s)
            for r, fj in enumerate(J):
                J2 = tuple(x for x in J if x != fj)
                tgt = dst_pos.get((J2, s))
                if tgt is None:
                    continue
                sign = 1 if (r % 2 == 0) else -1  # (-1)^{r+1} with r 1-based
                if s % 2 == 1:
                    sign = -sign
                g = ring.regseq[fj - 1].scale(sign)
                blocks[tgt][jsrc] = MatrixMap.poly_times_identity(
                    ring, g, B.module(s), level
                ).entries
            # B part: identity tensor b
            if s == 1:
                tgt = dst_pos.get((J, 0))
                if tgt is not None:
                    blocks[tgt][jsrc] = b.entries
        diffs[n] = MatrixMap.from_blocks(
            ring, blocks, src_mods, dst_mods, level
        )
    C = Complex(ring, level, modules, diffs, 0, m + 1)
    C.koszul_components = comp_lists
    return C


def _component_modules(ring, B, idxs, comps):
    mods = []
    for J, s in comps:
        extra = sum(ring.fdeg(j) for j in J)
        tag = "".join(f"e{j}" for j in J)
        tag = f"{tag}*" if tag else ""
        mods.append(B.module(s).shifted(extra, tag=tag))
    return mods


def koszul_complex(ring, idxs, level=0):
    """Full Koszul complex on f_{i1},...,f_{im} (rank-one top in degree m)."""
    idxs = tuple(idxs)
    m = len(idxs)
    modules = {}
    diffs = {}
    bases = {}
    for n in range(0, m + 1):
        Js = list(itertools.combinations(idxs, n))
        bases[n] = Js
        tws = tuple(sum(ring.fdeg(j) for j in J) for J in Js)
        labels = tuple("e" + "".join(str(j) for j in J) if J else "1" for J in Js)
        modules[n] = FreeModule(tws, labels)
    for n in range(1, m + 1):
        src = bases[n]
        dst = {J: k for k, J in enumerate(bases[n - 1])}
        z = ring.zero()
        rows = [[z] * len(src) for _ in bases[n - 1]]
        for jcol, J in enumerate(src):
            for r, fj in enumerate(J):
                J2 = tuple(x for x in J if x != fj)
                sign = 1 if (r % 2 == 0) else -1
                rows[dst[J2]][jcol] = ring.regseq[fj - 1].scale(sign)
        diffs[n] = MatrixMap(ring, modules[n], modules[n - 1], rows, level, check=False)
    return Complex(ring, level, modules, diffs, 0, m)


# ---------------------------------------------------------------------------
# Matrix-level graded solves


def solve_factorization(A, C, level, variant=0):
    """Solve A X + sum_m f_m W_m = C exactly over S (m <= level).

    A may be None (pure ideal division).  Returns (X, [W_1..W_level]) or None
    when some column is unsolvable.  X and the W_m are chosen first-pivot
    with free variables zero, column by column, so the output is
    deterministic.
    """
    ring = C.ring
    if A is not None and A.dst.twists != C.dst.twists:
        raise ShapeError("target rows mismatch")
    dst = C.dst
    slots = []
    if A is not None:
        for i in range(A.src.rank):
            slots.append((A.column(i), A.src.twists[i] + A.shift))
    ideal_slots = []
    for m in range(1, level + 1):
        fm = ring.regseq[m - 1]
        for k in range(dst.rank):
            vec = [None] * dst.rank
            vec[k] = fm
            ideal_slots.append(((m, k), tuple(vec)))
            slots.append((tuple(vec), dst.twists[k] + fm.degree()))
    ncols_A = A.src.rank if A is not None else 0
    # group target columns by their homogeneous degree
    groups = {}
    for j in range(C.src.rank):
        e = C.src.twists[j] + C.shift
        groups.setdefault(e, []).append(j)
    z = ring.zero()
    Xrows = (
        [[z] * C.src.rank for _ in range(ncols_A)] if A is not None else None
    )
    Wrows = [
        [[z] * C.src.rank for _ in range(dst.rank)] for _ in range(level)
    ]
    for e, cols in sorted(groups.items()):
        targets = [C.column(j) for j in cols]
        res = graded_solve(ring, dst.twists, e, slots, targets, variant=variant)
        for j, coeffs in zip(cols, res):
            if coeffs is None:
                return None
            if A is not None:
                for i in range(ncols_A):
                    Xrows[i][j] = coeffs[i]
            for si, ((m, k), _) in enumerate(ideal_slots):
                Wrows[m - 1][k][j] = coeffs[ncols_A + si]
    X = None
    if A is not None:
        X = MatrixMap(
            ring, C.src, A.src, Xrows, level, C.shift - A.shift, check=False
        )
    Ws = [
        MatrixMap(
            ring,
            C.src,
            dst,
            Wrows[m - 1],
            level,
            C.shift - ring.fdeg(m),
            check=False,
        )
        for m in range(1, level + 1)
    ]
    return X, Ws


def lift_through(A, C, level=None, variant=0):
    """X with A X = C modulo (f_1..f_level), or None."""
    level = C.level if level is None else level
    got = solve_factorization(A, C, level, variant=variant)
    if got is None:
        return None
    return got[0]


def divide_by_ideal(C, level=None):
    """W_1..W_level with sum f_m W_m = C exactly, or None."""
    level = C.level if level is None else level
    got = solve_factorization(None, C, level)
    if got is None:
        return None
    return got[1]


# ---------------------------------------------------------------------------
# Systems of higher homotopies


def multi_indices(c, total):
    """All multi-indices of length c with given |a|, lexicographic."""
    if c == 0:
        return [()] if total == 0 else []
    out = []

    def rec(i, rem, cur):
        if i == c - 1:
            out.append(tuple(cur + [rem]))
            return
        for v in range(rem, -1, -1):
            rec(i + 1, rem - v, cur + [v])

    rec(0, total, [])
    out.sort()
    return out


def index_shift(ring, findices, a):
    return sum(ai * ring.fdeg(j) for ai, j in zip(a, findices))


class HomotopySystem:
    """Higher homotopies sigma_a on a complex for the elements f_{j}, j in
    findices.  sigma_a maps degree m to degree m + 2|a| - 1 and adds internal
    degree sum a_i deg f_{j_i}; the zero index is the differential.
    """

    def __init__(self, complex_, findices, maps=None):
        self.complex = complex_
        self.findices = tuple(findices)
        self.maps = maps if maps is not None else {}

    @property
    def ring(self):
        return self.complex.ring

    def zero_index(self):
        return (0,) * len(self.findices)

    def get(self, a, m):
        """sigma_a at source homological degree m (zero map when absent but
        shapes force zero)."""
        a = tuple(a)
        if all(x == 0 for x in a):
            if m < self.complex.lo or m > self.complex.hi:
                return None
            return self.complex.diff(m)
        got = self.maps.get(a, {}).get(m)
        if got is not None:
            return got
        src = self.complex.module(m)
        tgt_deg = m + 2 * sum(a) - 1
        dst = self.complex.module(tgt_deg)
        if src.rank == 0 or dst.rank == 0:
            return MatrixMap.zero(
                self.complex.ring,
                src,
                dst,
                self.complex.level,
                index_shift(self.complex.ring, self.findices, a),
            )
        return None

    def set(self, a, m, mat):
        self.maps.setdefault(tuple(a), {})[m] = mat

    def known_indices(self):
        return sorted(self.maps.keys())


def validate_homotopy_system(C, sigma, max_total=None, hom_range=None):
    """Check the identities of a homotopy system at C's level.

    (1) sigma_0 is the differential (by construction).
    (2) sigma_0 sigma_{e_i} + sigma_{e_i} sigma_0 = f_i.
    (3) sum_{b+s=a} sigma_b sigma_s = 0 for |a| >= 2.

    Returns a list of failure strings (empty means valid for everything
    checkable in range).
    """
    ring = C.ring
    c = len(sigma.findices)
    failures = []
    totals = sorted({sum(a) for a in sigma.known_indices()})
    if max_total is not None:
        totals = [t for t in totals if t <= max_total]
    lo, hi = C.lo, C.hi
    if hom_range is not None:
        lo, hi = hom_range
    for total in totals:
        if total < 1:
            continue
        for a in multi_indices(c, total):
            for m in range(lo, hi + 1):
                if C.module(m).rank == 0:
                    continue
                acc = None
                missing = False
                for b in itertools.product(*(range(x + 1) for x in a)):
                    s = tuple(x - y for x, y in zip(a, b))
                    first = sigma.get(s, m)
                    if first is None:
                        missing = True
                        break
                    mid = m + 2 * sum(s) - 1
                    second = sigma.get(b, mid)
                    if second is None:
                        if C.module(mid).rank == 0:
                            continue
                        missing = True
                        break
                    term = second.compose(first)
                    acc = term if acc is None else acc + term
                if missing or acc is None:
                    continue
                if total == 1:
                    j = sigma.findices[a.index(1)]
                    f = ring.regseq[j - 1]
                    acc = acc - MatrixMap.poly_times_identity(
                        ring, f, C.module(m), C.level
                    )
                bad = acc.first_nonmember()
                if bad is not None:
                    failures.append(
                        f"homotopy identity fails: index {a}, source degree {m}, "
                        f"entry {bad}"
                    )
    return failures
