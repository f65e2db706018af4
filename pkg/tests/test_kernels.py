import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmf import _kernels

P = 32003


def random_matrix(data, m, n):
    A = np.zeros((m, n), dtype=np.int64)
    for i in range(m):
        for j in range(n):
            A[i, j] = data.draw(st.integers(0, P - 1))
    return A


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_rank_plus_nullity(data):
    m = data.draw(st.integers(0, 5))
    n = data.draw(st.integers(0, 5))
    A = random_matrix(data, m, n)
    r = _kernels.rank(A, P)
    N = _kernels.nullspace(A, P)
    assert r + N.shape[1] == n
    if m and n and N.shape[1]:
        assert not ((A @ N) % P).any()


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_solve_consistency(data):
    m = data.draw(st.integers(1, 5))
    n = data.draw(st.integers(1, 5))
    A = random_matrix(data, m, n)
    X = random_matrix(data, n, 2)
    B = (A @ X) % P
    ok, Y = _kernels.solve_many(A, B, P)
    assert ok.all()
    assert (((A @ Y) - B) % P == 0).all()


def test_inconsistent_column_flagged():
    A = np.array([[1, 0], [0, 0]], dtype=np.int64)
    B = np.array([[0, 1], [1, 0]], dtype=np.int64)
    ok, X = _kernels.solve_many(A, B, P)
    assert not ok[0] and ok[1]
    assert (X[:, 0] == 0).all()


def test_backends_agree():
    rng = np.random.default_rng(7)
    A = rng.integers(0, P, size=(8, 11)).astype(np.int64)
    R1, piv1 = _kernels.rref(A, P)
    Rnp = np.array(A, copy=True)
    pivnp = _kernels._rref_numpy(Rnp, P)
    assert (R1 == Rnp).all()
    assert (piv1 == pivnp).all()
    Rlp = np.array(A, copy=True)
    pivlp = _kernels._rref_loops(Rlp, P)
    assert (R1 == Rlp).all()
    assert (piv1 == np.asarray(pivlp)).all()


def test_numpy_fallback_env_flag():
    import os
    import subprocess
    import sys

    env = dict(os.environ)
    env["HMF_KERNEL"] = "numpy"
    root = os.path.join(os.path.dirname(__file__), "..")
    env["PYTHONPATH"] = os.path.join(root, "src")
    code = (
        "from hmf import _kernels\n"
        "assert _kernels.backend_name() == 'numpy'\n"
        "from hmf.corpus import codim2_xa_yb\n"
        "from hmf.factorization import validate_hmf\n"
        "assert validate_hmf(codim2_xa_yb()).ok\n"
        "print('numpy backend ok')\n"
    )
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    assert "numpy backend ok" in proc.stdout


def test_fraction_backend():
    from fractions import Fraction

    A = np.array(
        [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], dtype=object
    )
    assert _kernels.rank_frac(A) == 1
    N = _kernels.nullspace_frac(A)
    assert N.shape == (2, 1)
    assert A[0, 0] * N[0, 0] + A[0, 1] * N[1, 0] == 0
