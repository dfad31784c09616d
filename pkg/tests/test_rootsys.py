import itertools

import pytest
from hypothesis import given, strategies as st

from cschottky.errors import NotARoot, UnsupportedType
from cschottky.rootsys import build_root_system, complement, parabolic

# |Phi| = rank * Coxeter number
COXETER = {("A", n): n + 1 for n in range(1, 9)}
COXETER.update({("B", n): 2 * n for n in range(2, 9)})
COXETER.update({("C", n): 2 * n for n in range(2, 9)})
COXETER.update({("D", n): 2 * n - 2 for n in range(4, 9)})
COXETER.update({("E6", 6): 12, ("E7", 7): 18, ("F4", 4): 12, ("G2", 2): 6})


@pytest.mark.parametrize("t,n", sorted(COXETER))
def test_root_count_is_rank_times_coxeter_number(t, n):
    rs = build_root_system(t, n)
    assert len(rs.roots) == n * COXETER[(t, n)]
    assert len(rs.positive_roots) == len(rs.roots) // 2


@pytest.mark.parametrize("t,n", [("A", 3), ("B", 3), ("C", 3), ("D", 4), ("E6", 6), ("E7", 7), ("F4", 4),
                                 ("G2", 2)])
def test_simple_coordinates_are_integral_and_sign_coherent(t, n):
    rs = build_root_system(t, n)
    for r in rs.roots:
        c = rs.simple_coordinates(r)
        assert all(x >= 0 for x in c) or all(x <= 0 for x in c)
        assert rs.combine(c) == r


def test_highest_roots():
    # highest-root coefficients are standard data; F4 is labelled short roots first
    E8_free = {"E6": (1, 2, 2, 3, 2, 1), "E7": (2, 2, 3, 4, 3, 2, 1), "F4": (2, 4, 3, 2), "G2": (3, 2)}
    for t, coeffs in E8_free.items():
        rs = build_root_system(t)
        top = max(rs.positive_roots, key=lambda r: sum(rs.simple_coordinates(r)))
        assert rs.simple_coordinates(top) == coeffs


def test_format_root():
    rs = build_root_system("A", 3)
    assert rs.format_root(rs.combine((1, 1, 1))) == "e1-e4"
    E6 = build_root_system("E6")
    assert E6.format_root(E6.simple_root(1)).startswith("1/2(")


def test_unsupported_and_invalid():
    with pytest.raises(UnsupportedType):
        build_root_system("E8")
    with pytest.raises(UnsupportedType):
        build_root_system("D", 3)
    with pytest.raises(UnsupportedType):
        build_root_system("E6", 7)
    with pytest.raises(NotARoot):
        build_root_system("A", 2).simple_coordinates((2, 2, 0))


@given(st.sampled_from([("A", 4), ("B", 3), ("C", 4), ("D", 5), ("F4", 4)]), st.data())
def test_levi_and_nilradical_partition_roots(tn, data):
    rs = build_root_system(*tn)
    gamma = data.draw(st.sets(st.integers(1, rs.rank)))
    P = parabolic(rs, gamma)
    pos_levi = {r for r in P.levi_roots if r in set(rs.positive_roots)}
    assert len(pos_levi) + len(P.nilradical) == len(rs.positive_roots)
    assert not pos_levi & P.nilradical
    # the Levi part is closed under negation
    assert all(tuple(-c for c in r) in P.levi_roots for r in P.levi_roots)


def test_maximal_parabolic_of_projective_space():
    rs = build_root_system("A", 4)
    P = parabolic(rs, complement(rs, [1]))
    # nilradical of P_1 in A_n has n roots: e1 - e_j
    assert len(P.nilradical) == 4
    with pytest.raises(ValueError):
        parabolic(rs, [0])
