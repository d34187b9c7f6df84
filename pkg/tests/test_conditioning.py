import numpy as np
import pytest
from hypothesis import given, strategies as st

from logitcond.conditioning import (DegNSEPMethod, Status, analyze, classify, degnsep, degsep, margin,
                                    min_norm_point, nu_star, perturb_to_nonseparable, perturb_to_separable,
                                    separability_status)
from logitcond.data import (Dataset, contradictory_pair, generate_logistic, generate_planted_margin,
                            ill_posed_fixture, planted_pair)
from logitcond.errors import MethodUnavailable, NotApplicable
from logitcond.loss import loss_value, make_context
from logitcond.norms import Norm, dual_norm, lambda_min_sym, max_row_dual_norm, primal_norm
from logitcond.solvers import reference_optimum

NORMS = list(Norm)


def brute_force_degnsep(ds, norm, m=1_000_000):
    """Oracle: dense angular sweep of the p = 2 unit circle."""
    A = np.asarray(ds.signed_rows)
    best = np.inf
    for ch in np.array_split(np.linspace(0, 2 * np.pi, m, endpoint=False), 40):
        U = np.stack([np.cos(ch), np.sin(ch)], 1)
        U /= np.array([primal_norm(norm, u) for u in U])[:, None] if norm is not Norm.L2 else 1.0
        best = min(best, np.maximum(-(U @ A.T), 0).mean(1).min())
    return best


# ---------------------------------------------------------------- margin / degsep

def test_margin_examples():
    assert margin(planted_pair(), [1.0, 0.0]) == 1.0
    assert abs(margin(ill_posed_fixture(), np.ones(3) / np.sqrt(3))) <= 1e-15
    assert margin(ill_posed_fixture(), np.zeros(3)) == 0.0


def test_degsep_single_observation():
    r = degsep(Dataset(np.array([[1.0, 0.0]]), np.array([1])), Norm.L2)
    assert abs(r.value - 1) <= 1e-15 and r.gap <= 1e-15
    np.testing.assert_allclose(r.lam, [1.0])
    np.testing.assert_allclose(r.beta, [1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("norm", NORMS)
def test_degsep_ill_posed_fixture(norm):
    r = degsep(ill_posed_fixture(), norm)
    assert r.value <= 1e-8
    # the published certificate lambda = (3,3,1,1)/8 annihilates X'Y
    A = ill_posed_fixture().signed_rows
    np.testing.assert_allclose(A.T @ (np.array([3, 3, 1, 1]) / 8), 0, atol=1e-15)


def test_degsep_planted_frozen_value():
    # oracle: 40x80 angular grid on the sphere + Nelder-Mead polish of min_i y_i b.x_i
    r = degsep(generate_planted_margin(50, 3, 0.3, seed=7), Norm.L2)
    assert abs(r.value - 0.3897642994276553) <= 1e-9
    assert r.gap <= 1e-10


@pytest.mark.parametrize("norm", NORMS)
def test_degsep_bounds_and_certificate(norm):
    ds = generate_planted_margin(40, 3, 0.3, seed=11)
    r = degsep(ds, norm)
    assert 0.3 * 0 <= r.lower <= r.value <= max_row_dual_norm(norm, ds.X) + 1e-12
    assert r.value - r.lower <= 1e-8
    rng = np.random.default_rng(2)
    A = ds.signed_rows
    for _ in range(100):
        lam = rng.dirichlet(np.ones(ds.n))
        assert r.lower <= dual_norm(norm, A.T @ lam) + 1e-12


@pytest.mark.parametrize("norm", [Norm.L1, Norm.LINF])
def test_degsep_lp_matches_mirror_descent(norm):
    ds = generate_planted_margin(15, 3, 0.4, seed=5)
    exact = degsep(ds, norm, method="lp")
    md = degsep(ds, norm, method="mirror", max_iter=20000)
    assert md.lower - 1e-12 <= exact.value <= md.value + 1e-12
    assert abs(md.value - exact.value) <= 5e-3


def test_wolfe_against_quadratic_program():
    rng = np.random.default_rng(3)
    P = rng.standard_normal((12, 4)) + 2.0
    lam, x = min_norm_point(P)[:2]
    # KKT oracle: every hull vertex satisfies x.(p - x) >= 0
    assert np.min((P - x) @ x) >= -1e-10
    assert abs(lam.sum() - 1) <= 1e-12 and lam.min() >= 0
    np.testing.assert_allclose(P.T @ lam, x, atol=1e-12)


def test_degsep_wolfe_rejects_other_norms():
    with pytest.raises(MethodUnavailable):
        degsep(planted_pair(), Norm.L1, method="wolfe")


# ---------------------------------------------------------------- degnsep

@pytest.mark.parametrize("norm", NORMS)
def test_degnsep_contradictory_pair(norm):
    r = degnsep(contradictory_pair(), norm)
    assert r.value == 0.5 and abs(abs(r.witness[0]) - 1) == 0 and r.certified


def test_degnsep_ill_posed_fixture():
    r = degnsep(ill_posed_fixture(), Norm.L2)
    assert r.value <= 1e-8
    w = r.witness / np.linalg.norm(r.witness)
    assert abs(abs(w @ np.ones(3)) / np.sqrt(3) - 1) <= 1e-6


@pytest.mark.parametrize("norm,frozen", [(Norm.L2, 0.23186971061472922), (Norm.L1, 0.2065806430182234),
                                         (Norm.LINF, 0.23317888278446644)])
def test_degnsep_grid_frozen_brute_force(norm, frozen):
    # frozen values: 10^6-angle sweep of generate_logistic(20, 2, [1, -1], seed=11)
    r = degnsep(generate_logistic(20, 2, [1, -1], seed=11), norm)
    assert r.method is DegNSEPMethod.CERTIFIED_GRID
    assert abs(r.value - frozen) <= 1e-5
    assert r.lower_bound <= frozen + 1e-12


def test_degnsep_grid_live_brute_force():
    ds = generate_logistic(20, 2, [0.5, 0.5], seed=77)
    for norm in NORMS:
        assert abs(degnsep(ds, norm).value - brute_force_degnsep(ds, norm, 200_000)) <= 1e-4


@pytest.mark.parametrize("norm", [Norm.L1, Norm.LINF])
def test_facet_lp_agrees_with_grid(norm):
    ds = generate_logistic(25, 2, [1, 0.5], seed=4)
    a = degnsep(ds, norm, method="CertifiedGrid")
    b = degnsep(ds, norm, method="FacetExact")
    assert abs(a.value - b.value) <= 1e-6
    assert b.certified


def test_facet_exact_p3_against_heuristic():
    ds = generate_logistic(30, 3, [1, -1, 0.5], seed=6)
    for norm in (Norm.L1, Norm.LINF):
        ex = degnsep(ds, norm, method="FacetExact")
        he = degnsep(ds, norm, method="Heuristic")
        assert ex.value <= he.value + 1e-9
        assert not he.certified and he.lower_bound <= ex.value + 1e-9


def test_degnsep_method_unavailable():
    with pytest.raises(MethodUnavailable):
        degnsep(generate_logistic(10, 3, [1, 1, 1], 0), Norm.L2, method="CertifiedGrid")


def test_degnsep_zero_when_weakly_separable():
    # y_i x_i . (1, 0) >= 0 for every row: DegNSEP* = 0
    X = np.array([[1.0, 2.0], [0.0, -1.0], [2.0, 5.0], [0.0, 3.0]])
    ds = Dataset(X, np.array([1, 1, 1, -1]))
    for norm in NORMS:
        assert degnsep(ds, norm).value <= 1e-12


@pytest.mark.parametrize("norm", NORMS)
def test_scaling_homogeneity(norm):
    ds = generate_logistic(20, 2, [1, 1], seed=13)
    sp = generate_planted_margin(20, 2, 0.2, seed=13)
    for g in (0.01, 3.0, 1e4):
        assert degnsep(ds.scaled(g), norm).value == pytest.approx(g * degnsep(ds, norm).value, rel=1e-8)
        assert degsep(sp.scaled(g), norm).value == pytest.approx(g * degsep(sp, norm).value, rel=1e-8)


@pytest.mark.parametrize("norm", NORMS)
def test_loss_dominates_degnsep_times_norm(norm):
    ds = generate_logistic(30, 2, [1, -0.5], seed=17)
    D = degnsep(ds, norm).value
    ctx = make_context(ds, norm)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        b = rng.standard_normal(2) * rng.uniform(0, 30)
        assert loss_value(ctx, b) >= D * primal_norm(norm, b) - 1e-12


@pytest.mark.parametrize("norm", NORMS)
def test_local_strong_convexity_lower_bound(norm):
    ds = generate_logistic(40, 2, [1, -1], seed=21)
    D = degnsep(ds, norm).lower_bound
    ctx = make_context(ds, norm)
    ref = reference_optimum(ctx)
    nu_h = nu_star(ref.hessian, norm).value
    nu_x = nu_star(ds.X.T @ ds.X, norm).value
    xinf = max_row_dual_norm(norm, ds.X)
    assert nu_h >= nu_x / (4 * ds.n) * np.exp(-np.log(2) * xinf / D) - 1e-12


# ---------------------------------------------------------------- nu*

def test_nu_star_examples():
    assert nu_star(np.eye(2), Norm.L2).value == pytest.approx(1.0, abs=1e-14)
    assert nu_star(np.diag([2.0, 5.0]), Norm.L2).value == pytest.approx(2.0, abs=1e-14)
    r = nu_star(np.diag([2.0, 5.0]), Norm.L1)
    assert r.certified and r.value == pytest.approx(10 / 7, abs=1e-14)
    np.testing.assert_allclose(np.abs(r.witness), [5 / 7, 2 / 7], atol=1e-14)


@given(st.integers(0, 10 ** 6), st.sampled_from([Norm.L1, Norm.LINF]))
def test_nu_star_p2_against_parameterization(seed, norm):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((2, 2))
    M = B @ B.T
    th = np.linspace(0, 2 * np.pi, 20001)
    U = np.stack([np.cos(th), np.sin(th)], 1)
    U /= np.array([primal_norm(norm, u) for u in U])[:, None]
    oracle = np.min(np.einsum("ij,jk,ik->i", U, M, U))
    v = nu_star(M, norm).value
    assert v <= oracle + 1e-12
    assert v >= oracle - 1e-6 * max(1.0, np.abs(M).max())


def test_nu_star_uncertified_requirement():
    M = np.diag([1.0, 2.0, 3.0])
    with pytest.raises(MethodUnavailable):
        nu_star(M, Norm.L1, require_certified=True)
    assert nu_star(M, Norm.L2, require_certified=True).value == pytest.approx(lambda_min_sym(M))


# ---------------------------------------------------------------- status / analyze

def test_status_examples():
    assert separability_status(planted_pair()) is Status.SEPARABLE
    assert separability_status(contradictory_pair()) is Status.NON_SEPARABLE
    assert separability_status(ill_posed_fixture()) is Status.ILL_POSED


def test_classify_requires_certificate_for_nonseparable():
    r = degnsep(generate_logistic(20, 3, [1, 1, 1], 2), Norm.L2)   # heuristic at p = 3
    assert not r.certified
    assert classify(0.0, r, 1e-8) is Status.ILL_POSED


@pytest.mark.parametrize("norm", NORMS)
def test_analyze_report(norm):
    rep = analyze(generate_logistic(30, 2, [1, 1], 3), norm)
    assert rep.status is Status.NON_SEPARABLE
    assert rep.degsep.value <= rep.tol_ill
    assert rep.dist0_bound == pytest.approx(2 * np.log(2) / rep.degnsep.value)
    assert rep.beta_star_norm_bound == pytest.approx(np.log(2) / rep.degnsep.value)
    d = rep.to_dict()
    assert d["status"] == "NonSeparable" and d["degnsep"]["certified"]


# ---------------------------------------------------------------- perturbations

def test_perturb_contradictory_pair():
    p = perturb_to_separable(contradictory_pair(), Norm.L2, eps=0.1)
    assert separability_status(p.perturbed) is Status.SEPARABLE
    assert p.measured_norm == pytest.approx(0.6, abs=1e-12)


@pytest.mark.parametrize("norm", NORMS)
def test_perturb_ill_posed_small(norm):
    p = perturb_to_separable(ill_posed_fixture(), norm, eps=1e-3)
    assert separability_status(p.perturbed, norm) is Status.SEPARABLE
    assert p.measured_norm <= 1e-3 + 1e-9


def test_perturb_single_observation_to_nonseparable():
    p = perturb_to_nonseparable(Dataset(np.array([[1.0, 0.0]]), np.array([1])), Norm.L2)
    np.testing.assert_allclose(p.delta_X, [[-1.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(p.perturbed.X, [[0.0, 0.0]], atol=1e-15)
    assert p.measured_norm == pytest.approx(1.0)
    assert separability_status(p.perturbed) is not Status.SEPARABLE


@pytest.mark.parametrize("norm", NORMS)
def test_perturb_planted_to_nonseparable(norm):
    ds = generate_planted_margin(20, 2, 0.5, seed=4)
    r = degsep(ds, norm)
    p = perturb_to_nonseparable(ds, norm)
    assert separability_status(p.perturbed, norm) is not Status.SEPARABLE
    assert abs(p.measured_norm - r.value) <= 1e-8 + r.gap
    # the measured value is the stated operator norm of delta_X
    assert p.measured_norm == pytest.approx(max_row_dual_norm(norm, p.delta_X), abs=1e-9)


def test_perturb_error_paths():
    with pytest.raises(NotApplicable):
        perturb_to_separable(planted_pair(), Norm.L2)
    with pytest.raises(NotApplicable):
        perturb_to_nonseparable(contradictory_pair(), Norm.L2)
