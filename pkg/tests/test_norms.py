import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from logitcond.errors import NonFinite, NotSymmetric, ZeroGradient
from logitcond.norms import (Norm, dual_norm, lambda_min_sym, max_row_dual_norm, operator_norm_x_dot_2,
                             operator_norms, primal_norm, unit_maximizer)

NORMS = list(Norm)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_dual_pairs():
    assert Norm.L1.dual is Norm.LINF
    assert Norm.L2.dual is Norm.L2
    assert Norm.LINF.dual is Norm.L1


@pytest.mark.parametrize("norm,v,expected", [
    (Norm.L1, (3, -4), 4), (Norm.L2, (3, 4), 5), (Norm.LINF, (3, -4), 7)])
def test_dual_norm_examples(norm, v, expected):
    assert dual_norm(norm, np.array(v, float)) == expected


@pytest.mark.parametrize("norm,g,expected", [
    (Norm.L2, (3, 4), (0.6, 0.8)), (Norm.L1, (3, -4), (0, -1)), (Norm.LINF, (3, -4), (1, -1))])
def test_unit_maximizer_examples(norm, g, expected):
    np.testing.assert_allclose(unit_maximizer(norm, np.array(g, float)), expected, rtol=0, atol=1e-15)


def test_unit_maximizer_zero():
    for norm in NORMS:
        with pytest.raises(ZeroGradient):
            unit_maximizer(norm, np.zeros(3))


def test_l1_tie_breaks_to_lowest_index():
    np.testing.assert_array_equal(unit_maximizer(Norm.L1, np.array([2.0, -2.0, 1.0])), [1, 0, 0])


@given(arrays(float, st.integers(1, 6), elements=finite), st.sampled_from(NORMS))
def test_holder_equality(v, norm):
    if not np.any(v):
        return
    d = unit_maximizer(norm, v)
    assert abs(v @ d - dual_norm(norm, v)) <= 1e-12 * max(1.0, dual_norm(norm, v))
    assert abs(primal_norm(norm, d) - 1.0) <= 1e-12


@given(arrays(float, st.integers(1, 6), elements=finite), arrays(float, 6, elements=finite),
       st.sampled_from(NORMS))
def test_dual_norm_is_sup_over_ball(v, x, norm):
    x = x[: v.size]
    nx = primal_norm(norm, x)
    if nx == 0:
        return
    assert v @ (x / nx) <= dual_norm(norm, v) * (1 + 1e-12) + 1e-12


@pytest.mark.parametrize("norm,X,expected", [
    (Norm.L2, np.eye(2), 1.0), (Norm.L1, [[3, 0], [4, 1]], 5.0), (Norm.L2, [[3, 4], [0, 0]], 5.0)])
def test_operator_norm_examples(norm, X, expected):
    v = operator_norm_x_dot_2(norm, np.array(X, float))
    assert v.certified
    assert abs(v.value - expected) <= 1e-12


@pytest.mark.parametrize("norm,X,expected", [
    (Norm.L2, [[3, 4], [0, 1]], 5), (Norm.L1, [[3, -4], [1, 1]], 4), (Norm.LINF, [[1, 1], [2, 0]], 2)])
def test_max_row_dual_norm_examples(norm, X, expected):
    assert max_row_dual_norm(norm, np.array(X, float)) == expected


def test_nonfinite_rejected():
    with pytest.raises(NonFinite):
        operator_norm_x_dot_2(Norm.L2, np.array([[1.0, np.nan]]))
    with pytest.raises(NonFinite):
        max_row_dual_norm(Norm.L1, np.array([[np.inf, 0.0]]))


@pytest.mark.parametrize("norm", NORMS)
def test_operator_norms_dominate_random_unit_vectors(norm):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((15, 4))
    ops = operator_norms(norm, X)
    B = rng.standard_normal((1000, 4))
    B /= np.array([primal_norm(norm, b) for b in B])[:, None]
    XB = B @ X.T
    assert np.max(np.linalg.norm(XB, axis=1)) <= ops.x_dot_2 + 1e-9
    assert np.max(np.abs(XB)) <= ops.x_dot_inf + 1e-9


def test_linf_operator_norm_exact_against_vertices():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((9, 5))
    # oracle: the convex function ||X b||_2 peaks at a vertex of the cube
    signs = np.array(np.meshgrid(*[[-1, 1]] * 5)).reshape(5, -1).T
    oracle = np.max(np.linalg.norm(signs @ X.T, axis=1))
    v = operator_norm_x_dot_2(Norm.LINF, X)
    assert v.certified and abs(v.value - oracle) <= 1e-12 * oracle


def test_linf_operator_norm_large_p_is_flagged_overestimate():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 20))
    v = operator_norm_x_dot_2(Norm.LINF, X)
    assert not v.certified
    assert v.value >= np.max(np.linalg.norm(np.sign(rng.standard_normal((500, 20))) @ X.T, axis=1))


@pytest.mark.parametrize("M,expected", [(np.diag([2.0, 5.0]), 2.0), (np.eye(3), 1.0),
                                        (np.array([[2.0, 1.0], [1.0, 2.0]]), 1.0)])
def test_lambda_min_examples(M, expected):
    assert abs(lambda_min_sym(M) - expected) <= 1e-12


def test_lambda_min_not_symmetric():
    with pytest.raises(NotSymmetric):
        lambda_min_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))


def _charpoly_min_root(M):
    # oracle: roots of the characteristic polynomial, independent of any eigen-solver
    return float(np.min(np.real(np.roots(np.poly(M)))))


@given(st.integers(2, 3), st.integers(0, 10 ** 6))
def test_lambda_min_vs_characteristic_polynomial(p, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((p, p))
    M = B + B.T
    assert abs(lambda_min_sym(M) - _charpoly_min_root(M)) <= 1e-8 * max(1.0, np.abs(M).max())


def test_lambda_min_larger_matrix_against_eigvalsh():
    rng = np.random.default_rng(4)
    B = rng.standard_normal((12, 12))
    M = B @ B.T + 1e-3 * np.eye(12)
    assert abs(lambda_min_sym(M) - np.linalg.eigvalsh(M)[0]) <= 1e-9
