import pytest

from hmf.complexes import MatrixMap, two_term_complex, validate_homotopy_system
from hmf.corpus import codim2_xa_yb, micro_codim1
from hmf.lifting import (
    Obstruction,
    ci_from_lifting,
    higher_homotopies,
    homotopy_comparison,
    koszul_extension,
    lifted_comparison_check,
    nullhomotopy,
    verify_comparison,
)
from hmf.oracle import exactness_certificate


@pytest.fixture(scope="module")
def F():
    return codim2_xa_yb()


@pytest.fixture(scope="module")
def L(F):
    from hmf.resolutions import build_finite

    return build_finite(F).complex


def test_nullhomotopy_zero_map(F):
    B1 = two_term_complex(F.ring, F.d_p(1))
    gamma = {i: MatrixMap.zero(F.ring, B1.module(i), B1.module(i), 0, 2)
             for i in (0, 1)}
    alpha = nullhomotopy(B1, B1, 0, gamma)
    assert all(m.is_zero() for m in alpha.values())


def test_nullhomotopy_recovers_h1(F):
    ring = F.ring
    B1 = two_term_complex(ring, F.d_p(1))
    f1 = ring.regseq[0]
    gamma = {
        i: MatrixMap.poly_times_identity(ring, f1, B1.module(i), 0)
        for i in (0, 1)
    }
    alpha = nullhomotopy(B1, B1, 0, gamma)
    # the solution at the bottom is forced and equals the stored homotopy
    assert alpha[1].entries == F.h[1].entries


def test_nullhomotopy_obstruction(F):
    from hmf.resolutions import build_finite

    ring = F.ring
    L = build_finite(F).complex.truncate(0, 1)
    f2 = ring.regseq[1]
    gamma = {
        i: MatrixMap.poly_times_identity(ring, f2, L.module(i), 0)
        for i in (0, 1)
    }
    with pytest.raises(Obstruction) as err:
        nullhomotopy(L, L, 0, gamma)
    assert err.value.degree == 1


def test_higher_homotopies_micro():
    Fm = micro_codim1()
    G = two_term_complex(Fm.ring, Fm.d_p(1))
    sigma = higher_homotopies(G, (1,), 3)
    assert sigma.get((1,), 0).entries[0][0] == Fm.ring.poly("x")
    # indices of total >= 2 vanish by shape
    assert all(sum(a) < 2 for a in sigma.known_indices())
    assert not validate_homotopy_system(G, sigma)


def test_higher_homotopies_non_annihilating(F):
    # f_2 does not annihilate the stage-1 module: obstruction at degree 0
    G = two_term_complex(F.ring, F.d_p(1))
    with pytest.raises(Obstruction) as err:
        higher_homotopies(G, (2,), 1)
    assert err.value.degree in (0, 1)


def test_higher_homotopies_prescribed_start_checked(F):
    G = two_term_complex(F.ring, F.d_p(1))
    wrong = MatrixMap(
        F.ring, G.module(0), G.module(1), F.d_p(1).entries, 0, 2, check=False
    )
    with pytest.raises(AssertionError):
        higher_homotopies(G, (1,), 1, start={((1,), 0): wrong})


def test_koszul_extension_matches_display(F):
    B = two_term_complex(F.ring, F.b_block(2))
    L1 = two_term_complex(F.ring, F.d_p(1))
    KB, phi = koszul_extension(F.psi_block(2), B, L1, (1,))
    # the e_1 block solves to h_1 psi_2, the display's component
    expect = F.h[1].compose(F.psi_block(2))
    assert phi[1].entries == expect.entries


def test_koszul_extension_cone_is_exact(F):
    from hmf.complexes import mapping_cone

    B = two_term_complex(F.ring, F.b_block(2))
    L1 = two_term_complex(F.ring, F.d_p(1))
    KB, phi = koszul_extension(F.psi_block(2), B, L1, (1,))
    cone = mapping_cone(L1, KB, phi)
    cert = exactness_certificate(cone, (1, 2), 8)
    assert cert.verdict == "PASS"


def test_ci_from_lifting_periodic(F):
    from hmf.resolutions import build_infinite

    Fm = micro_codim1()
    T = build_infinite(Fm, 6).complex
    tilde, failures = ci_from_lifting(T)
    assert not failures
    for i in sorted(tilde[1]):
        assert tilde[1][i].entries[0][0] == Fm.ring.one()


def test_ci_from_lifting_resubstitutes(F):
    from hmf.resolutions import build_infinite

    T = build_infinite(F, 6).complex
    tilde, failures = ci_from_lifting(T)
    assert not failures
    ring = F.ring
    for i in range(2, 6):
        sq = T.diff(i - 1).compose(T.diff(i))
        acc = None
        for j in (1, 2):
            term = tilde[j][i].scale_poly(ring.regseq[j - 1])
            acc = term if acc is None else acc + term
        assert (acc - sq).is_zero()


def test_multi_index_system(F, L):
    # a full system for both elements on the finite resolution, through
    # total order 2 (includes the mixed index)
    sigma = higher_homotopies(L, (1, 2), 2)
    assert (1, 0) in sigma.known_indices() and (0, 1) in sigma.known_indices()
    failures = validate_homotopy_system(L, sigma, max_total=2)
    assert not failures


def test_homotopy_comparison_identity_case(F, L):
    sig = higher_homotopies(L, (2,), 3)
    phi0 = {v: MatrixMap.identity(F.ring, L.module(v), 0) for v in range(0, 3)}
    phis = homotopy_comparison(phi0, sig, sig, 3)
    fails, checked = verify_comparison(phis, sig, sig, 3)
    assert not fails and checked
    assert not lifted_comparison_check(phis, sig, sig, 7)


def test_homotopy_comparison_richer_complex():
    # Koszul resolution of the quotient by all variables: homotopies for the
    # first element are genuinely non-unique, so the two deterministic
    # representatives differ and the comparison maps are nonzero
    from hmf.complexes import koszul_complex
    from hmf.ring import Field, GradedRing

    ring = GradedRing.make(
        Field(), [("a", 1), ("b", 1), ("x", 1), ("y", 1)], ["x*a", "y*b"]
    )
    # resolution of the residue field: Koszul complex on the variables
    vars_ring = GradedRing.make(
        Field(),
        [("a", 1), ("b", 1), ("x", 1), ("y", 1)],
        ["a", "b", "x", "y", "x*a"],
    )
    K = koszul_complex(vars_ring, (1, 2, 3, 4), level=0)
    sig1 = higher_homotopies(K, (5,), 2)
    sig2 = higher_homotopies(K, (5,), 2, variant=1)
    differ = any(
        (sig1.get((1,), m) is not None and sig2.get((1,), m) is not None
         and sig1.get((1,), m).entries != sig2.get((1,), m).entries)
        for m in range(0, 4)
    )
    assert differ
    phi0 = {v: MatrixMap.identity(vars_ring, K.module(v), 0)
            for v in range(0, 5)}
    phis = homotopy_comparison(phi0, sig1, sig2, 2)
    nonzero = any(
        not mm.is_zero() for j, d in phis.items() if j >= 1 for mm in d.values()
    )
    assert nonzero
    fails, checked = verify_comparison(phis, sig1, sig2, 2)
    assert not fails and checked
    assert not lifted_comparison_check(phis, sig1, sig2, 5)
