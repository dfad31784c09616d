import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from cschottky.errors import BranchCut, NotDiagonalizable, RankAmbiguous, SchottkyError
from cschottky.numlin import (Tolerances, SubspaceBasis, distance_from_scalars, intersect_dim, lie_closure,
                              matrix_from_json, matrix_log_semisimple, matrix_to_json, normalize_det,
                              null_space, projective_distance, rank_with_tol, span_projection_residual)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_rank_of_product_of_thin_factors():
    rng = np.random.default_rng(0)
    M = crandn(rng, 7, 3) @ crandn(rng, 3, 9)
    assert rank_with_tol(M) == 3
    assert rank_with_tol(np.zeros((3, 3))) == 0


def test_rank_ambiguous_near_cutoff():
    M = np.diag([1.0, 1.0, 2e-9])
    with pytest.raises(RankAmbiguous):
        rank_with_tol(M)
    assert rank_with_tol(np.diag([1.0, 1.0, 1e-14])) == 2


def test_tolerances_reject_below_machine_epsilon():
    with pytest.raises(ValueError):
        Tolerances(rank_rel=1e-20)
    with pytest.raises(ValueError):
        Tolerances(cert_margin=-1.0)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 3), st.integers(0, 10 ** 6))
def test_intersect_dim_of_planted_subspaces(ka, kb, common, seed):
    # two subspaces of C^12 sharing a planted common part of known dimension
    rng = np.random.default_rng(seed)
    C = crandn(rng, 12, common)
    A = np.hstack([C, crandn(rng, 12, ka)])
    B = np.hstack([C, crandn(rng, 12, kb)])
    d = intersect_dim(SubspaceBasis.span(A), SubspaceBasis.span(B))
    assert d == common


@given(st.integers(0, 10 ** 6))
def test_intersect_dim_is_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    A = SubspaceBasis.span(crandn(rng, 6, 3))
    B = SubspaceBasis.span(np.hstack([A.basis[:, :1], crandn(rng, 6, 2)]))
    U, _ = np.linalg.qr(crandn(rng, 6, 6))
    assert intersect_dim(A, B) == intersect_dim(A.transformed(U), B.transformed(U)) == 1
    assert A.transformed(U).orthonormality_residual() < 1e-10


def test_lie_closure_of_sl2_generators():
    e = np.array([[0, 1], [0, 0]])
    f = np.array([[0, 0], [1, 0]])
    basis = lie_closure([e, f])
    assert len(basis) == 3
    assert span_projection_residual(basis, np.diag([1, -1])) < 1e-12
    assert span_projection_residual(basis, np.eye(2)) > 0.5


def test_lie_closure_of_generic_pair_is_sl():
    rng = np.random.default_rng(1)
    X, Y = crandn(rng, 4, 4), crandn(rng, 4, 4)
    X -= np.trace(X) / 4 * np.eye(4)
    Y -= np.trace(Y) / 4 * np.eye(4)
    assert len(lie_closure([X, Y])) == 15


def test_lie_closure_of_two_conjugate_half_tori():
    # two involutions J, J' with (2, 2) eigenspaces in general position split C^4
    # into two invariant planes, so they generate sl2 + sl2, not sl4
    rng = np.random.default_rng(4)
    J = np.diag([-1.0, -1.0, 1.0, 1.0])
    f = crandn(rng, 4, 4)
    Jf = f @ J @ np.linalg.inv(f)
    basis = lie_closure([J / 2, Jf / 2])
    assert len(basis) == 6
    C = J @ Jf + Jf @ J
    assert max(np.linalg.norm(B @ C - C @ B) for B in basis) < 1e-8 * np.linalg.norm(C)
    assert np.linalg.norm(C - np.trace(C) / 4 * np.eye(4)) > 1e-3


def test_lie_closure_of_commuting_generators_is_abelian():
    D1, D2 = np.diag([1, 2, -3]), np.diag([0, 1, -1])
    assert len(lie_closure([D1, D2])) == 2


def test_matrix_log_matches_scipy():
    rng = np.random.default_rng(2)
    V = crandn(rng, 4, 4)
    g = V @ np.diag([2.0, 0.5j, 1 + 1j, 3.0]) @ np.linalg.inv(V)
    L = matrix_log_semisimple(g)
    assert np.allclose(sla.expm(L), g, atol=1e-10)
    assert np.allclose(L, sla.logm(g), atol=1e-8)


def test_matrix_log_errors():
    with pytest.raises(BranchCut):
        matrix_log_semisimple(np.diag([-1.0, 1.0]))
    with pytest.raises(NotDiagonalizable):
        matrix_log_semisimple(np.array([[1.0, 1.0], [0.0, 1.0]]))
    # rotating the cut makes -1 admissible
    L = matrix_log_semisimple(np.diag([-1.0, 1.0]), branch_offset=0.5)
    assert np.allclose(sla.expm(L), np.diag([-1.0, 1.0]))


def test_json_roundtrip_is_exact():
    rng = np.random.default_rng(3)
    M = crandn(rng, 3, 5)
    assert np.array_equal(matrix_from_json(matrix_to_json(M)), M)
    with pytest.raises(SchottkyError):
        matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})


def test_projective_and_scalar_distances():
    rng = np.random.default_rng(4)
    g = crandn(rng, 3, 3)
    assert projective_distance(g, (2 - 3j) * g) < 1e-14
    assert distance_from_scalars(5j * np.eye(3)) < 1e-15
    assert distance_from_scalars(np.diag([1, 1, -1])) > 0.5
    assert abs(abs(np.linalg.det(normalize_det(g))) - 1) < 1e-12


def test_null_space_matches_scipy():
    rng = np.random.default_rng(5)
    M = crandn(rng, 4, 2) @ crandn(rng, 2, 6)
    K = null_space(M)
    assert K.shape[1] == sla.null_space(M).shape[1] == 4
    assert np.abs(M @ K).max() < 1e-10
