"""Dense exact linear algebra kernels over prime fields.

Everything downstream (graded solves, rank counts, homology tables) funnels
into row reduction of int64 matrices with entries reduced mod p.  Two
interchangeable implementations are provided:

* a numba ``@njit`` build (default when numba imports cleanly), and
* a pure-numpy fallback.

Selection is controlled by the environment variable ``HMF_KERNEL`` with
values ``numba`` or ``numpy``.  Both implementations use first-nonzero
pivoting and Gauss-Jordan elimination, so their outputs are bit-identical;
``benchmarks/bench_linalg.py`` compares their speed.

A Fraction-based reducer backs the optional characteristic-zero field.
"""

from __future__ import annotations

import os
from fractions import Fraction

import numpy as np

_BACKEND_REQUESTED = os.environ.get("HMF_KERNEL", "").strip().lower()

_HAVE_NUMBA = False
if _BACKEND_REQUESTED != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - env without numba
        _HAVE_NUMBA = False

if _BACKEND_REQUESTED == "numba" and not _HAVE_NUMBA:  # pragma: no cover
    raise RuntimeError("HMF_KERNEL=numba requested but numba is not importable")


def _rref_numpy(R, p):
    """Gauss-Jordan reduce R in place mod p; return pivot column array."""
    m, n = R.shape
    piv_cols = []
    r = 0
    for c in range(n):
        if r == m:
            break
        col = R[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        inv = pow(int(R[r, c]), p - 2, p)
        R[r] = (R[r] * inv) % p
        factor = R[:, c].copy()
        factor[r] = 0
        nzrows = np.nonzero(factor)[0]
        if nzrows.size:
            R[nzrows] = (R[nzrows] - np.outer(factor[nzrows], R[r])) % p
        piv_cols.append(c)
        r += 1
    return np.asarray(piv_cols, dtype=np.int64)


def _rref_loops(R, p):
    m, n = R.shape
    piv_cols = np.empty(min(m, n), dtype=np.int64)
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if R[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n):
                tmp = R[r, j]
                R[r, j] = R[piv, j]
                R[piv, j] = tmp
        # modular inverse via binary exponentiation
        base = R[r, c]
        e = p - 2
        inv = 1
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for j in range(n):
            R[r, j] = (R[r, j] * inv) % p
        for i in range(m):
            if i != r and R[i, c] != 0:
                f = R[i, c]
                for j in range(n):
                    R[i, j] = (R[i, j] - f * R[r, j]) % p
        piv_cols[r] = c
        r += 1
    return piv_cols[:r].copy()


if _HAVE_NUMBA:
    _rref_numba = njit(cache=True)(_rref_loops)


def backend_name():
    if _BACKEND_REQUESTED == "numpy" or not _HAVE_NUMBA:
        return "numpy"
    return "numba"


def rref(A, p):
    """Reduced row echelon form of A mod p.

    Returns (R, piv_cols); A is not modified.
    """
    R = np.array(A, dtype=np.int64, copy=True)
    R %= p
    if R.size == 0:
        return R, np.empty(0, dtype=np.int64)
    if backend_name() == "numba":
        piv = _rref_numba(R, p)
    else:
        piv = _rref_numpy(R, p)
    return R, piv


def rank(A, p):
    _, piv = rref(A, p)
    return int(piv.size)


def solve_many(A, B, p):
    """Solve A X = B columnwise mod p.

    Returns (ok, X) where ok[j] says column j is consistent and X holds the
    first-pivot solution with free variables set to zero (zeros where not ok).
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    m, n = A.shape
    mb, k = B.shape
    assert m == mb
    M = np.concatenate([A % p, B % p], axis=1) if m else np.zeros((0, n + k), dtype=np.int64)
    R, piv = rref(M, p)
    ok = np.ones(k, dtype=bool)
    X = np.zeros((n, k), dtype=np.int64)
    for r0, c in enumerate(piv):
        if c >= n:
            ok[(R[r0, n:] != 0)] = False
        else:
            X[c] = R[r0, n:]
    # rows with pivot beyond A force inconsistency of any column they touch;
    # handled above.  Zero out non-solutions for determinism.
    X[:, ~ok] = 0
    return ok, X


def nullspace(A, p):
    """Basis of the right nullspace mod p, columns ordered by free variable.

    Free coordinates are set one-hot, pivots back-substituted, so the basis
    is deterministic.
    """
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if m == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(A, p)
    pivset = set(int(c) for c in piv)
    free = [c for c in range(n) if c not in pivset]
    N = np.zeros((n, len(free)), dtype=np.int64)
    for j, fcol in enumerate(free):
        N[fcol, j] = 1
        for r0, c in enumerate(piv):
            N[int(c), j] = (-R[r0, fcol]) % p
    return N


def in_row_space_complement(R, piv, b, p):
    """Reduce b against RREF rows; return the residual vector."""
    v = np.array(b, dtype=np.int64) % p
    for r0, c in enumerate(piv):
        f = v[int(c)]
        if f:
            v = (v - f * R[r0]) % p
    return v


# ---------------------------------------------------------------------------
# Characteristic-zero fallback (Fractions in object arrays; slow, optional)


def frac_zeros(m, n):
    Z = np.empty((m, n), dtype=object)
    Z[:] = Fraction(0)
    return Z


def rref_frac(A):
    """RREF over Q.  A: object ndarray of Fractions.  Returns (R, pivots)."""
    R = np.array(A, dtype=object, copy=True)
    m, n = R.shape
    piv_cols = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if R[i, c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        inv = Fraction(1) / R[r, c]
        R[r] = R[r] * inv
        for i in range(m):
            if i != r and R[i, c] != 0:
                R[i] = R[i] - R[i, c] * R[r]
        piv_cols.append(c)
        r += 1
    return R, piv_cols


def solve_many_frac(A, B):
    m, n = A.shape
    k = B.shape[1]
    ok = [True] * k
    X = frac_zeros(n, k)
    if m == 0:
        return ok, X
    M = np.concatenate([A, B], axis=1)
    R, piv = rref_frac(M)
    for r0, c in enumerate(piv):
        if c >= n:
            for j in range(k):
                if R[r0, n + j] != 0:
                    ok[j] = False
        else:
            X[c] = R[r0, n:]
    for j in range(k):
        if not ok[j]:
            for i in range(n):
                X[i, j] = Fraction(0)
    return ok, X


def nullspace_frac(A):
    m, n = A.shape
    if n == 0:
        return frac_zeros(0, 0)
    if m == 0:
        N = frac_zeros(n, n)
        for j in range(n):
            N[j, j] = Fraction(1)
        return N
    R, piv = rref_frac(A)
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    N = frac_zeros(n, len(free))
    for j, fcol in enumerate(free):
        N[fcol, j] = Fraction(1)
        for r0, c in enumerate(piv):
            N[c, j] = -R[r0, fcol]
    return N


def rank_frac(A):
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    _, piv = rref_frac(A)
    return len(piv)
