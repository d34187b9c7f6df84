import numpy as np
import pytest
from scipy import stats
from scipy.optimize import minimize

from logitcond.conditioning import degnsep
from logitcond.data import (Dataset, DiscreteDistribution, contradictory_pair, generate_logistic,
                            generate_planted_margin)
from logitcond.errors import NotAttained, WrongOption, WrongStepRule
from logitcond.loss import make_context
from logitcond.norms import Norm, primal_norm
from logitcond.solvers import (StepRule, option_b_index, reference_optimum, sgd, sgd_trials,
                               steepest_descent, trial_seed)

NORMS = list(Norm)


def test_contradictory_pair_is_stationary_at_zero():
    ctx = make_context(contradictory_pair(), Norm.L2)
    tr = steepest_descent(ctx, StepRule.greedy(ctx.smoothness_L), 50)
    assert tr.metadata["stationary_exact"] and tr.k_max == 0
    assert tr.loss[0] == pytest.approx(np.log(2), rel=2 ** -52)
    assert not np.any(tr.final_beta)


def test_l1_steps_touch_one_coordinate():
    ds = generate_logistic(40, 6, [1, -1, 0.5, 0, 0, 2], seed=9)
    ctx = make_context(ds, Norm.L1)
    tr = steepest_descent(ctx, StepRule.nonsep(), 5, checkpoint_stride=1)
    for k in range(tr.k_max + 1):
        assert np.count_nonzero(tr.beta_at(k)) <= k


@pytest.mark.parametrize("norm", NORMS)
def test_greedy_descent_inequality_and_monotone_loss(norm):
    ds = generate_logistic(50, 3, [1, -0.5, 0.25], seed=14)
    ctx = make_context(ds, norm)
    L = ctx.smoothness_L
    tr = steepest_descent(ctx, StepRule.greedy(L), 300)
    drop = tr.loss[:-1] - tr.loss[1:]
    assert np.all(drop >= tr.grad_dual_norm[:-1] ** 2 / (2 * L) - 1e-14)
    nt = steepest_descent(ctx, StepRule.nonsep(), 300)
    assert np.all(np.diff(nt.loss) <= 1e-15)


@pytest.mark.parametrize("norm", NORMS)
def test_trace_columns_are_recomputable(norm):
    ds = generate_logistic(30, 2, [1, 1], seed=15)
    ctx = make_context(ds, norm)
    tr = steepest_descent(ctx, StepRule.nonsep(), 40, checkpoint_stride=1)
    A = ds.signed_rows
    for k in (0, 7, 40):
        b = tr.beta_at(k)
        assert tr.beta_norm[k] == pytest.approx(primal_norm(norm, b), rel=1e-14, abs=0)
        assert tr.margin[k] == pytest.approx(np.min(A @ b), abs=1e-14)
        # oracle loss: plain log(1 + exp(-t)) without the stable rewrite
        assert tr.loss[k] == pytest.approx(np.mean(np.log1p(np.exp(-(A @ b)))), rel=1e-13)


def test_final_loss_matches_reference_optimum():
    ds = generate_logistic(40, 3, [1, -0.5, 0.25], seed=5)
    ctx = make_context(ds, Norm.L2)
    tr = steepest_descent(ctx, StepRule.greedy(ctx.smoothness_L), 20000, checkpoint_stride=20000)
    # frozen: BFGS oracle on the same data
    assert tr.loss[-1] - 0.5680048992002191 <= 1e-6
    assert reference_optimum(ctx).loss == pytest.approx(0.5680048992002191, abs=1e-12)


def test_reference_optimum_against_scipy():
    ds = generate_logistic(60, 4, [0.3, -1, 0.2, 0.7], seed=8)
    A = ds.signed_rows
    res = minimize(lambda b: np.mean(np.logaddexp(0, -(A @ b))), np.zeros(4), method="BFGS",
                   options={"gtol": 1e-11})
    ref = reference_optimum(make_context(ds, Norm.L2))
    assert ref.converged
    np.testing.assert_allclose(ref.beta, res.x, atol=1e-5)
    assert ref.loss <= res.fun + 1e-14


@pytest.mark.parametrize("norm", NORMS)
def test_minimizer_norm_bound(norm):
    ds = generate_logistic(30, 2, [1, -1], seed=11)
    ref = reference_optimum(make_context(ds, norm))
    assert primal_norm(norm, ref.beta) <= np.log(2) / degnsep(ds, norm).lower_bound + 1e-12


def test_reference_optimum_not_attained_on_separable_data():
    with pytest.raises(NotAttained):
        reference_optimum(make_context(generate_planted_margin(20, 2, 0.5, seed=4), Norm.L2))


def test_step_rule_errors():
    ctx1 = make_context(generate_planted_margin(20, 2, 0.5, seed=4), Norm.L1)
    with pytest.raises(WrongStepRule):
        steepest_descent(ctx1, StepRule.sepl2(), 10)
    with pytest.raises(WrongStepRule):
        steepest_descent(ctx1, StepRule.constant(0.1), 10)
    with pytest.raises(WrongOption):
        sgd(DiscreteDistribution.uniform(contradictory_pair()), StepRule.constant(0.1), 5, option="C")


def test_nonzero_start_marks_trace():
    ctx = make_context(generate_logistic(20, 2, [1, 1], seed=1), Norm.L2)
    tr = steepest_descent(ctx, StepRule.nonsep(), 5, beta0=[0.1, 0.0])
    assert not tr.metadata["guarantees_applicable"]


# ---------------------------------------------------------------- SGD

def test_rcor_step_size():
    assert StepRule.rcor(2.0, 2499).sgd_alpha() == pytest.approx(np.log(2) / (50 * 4.0), rel=1e-15)


def test_single_sgd_step_from_zero():
    ds = Dataset(np.array([[3.0, -4.0]]), np.array([-1]))
    a = 0.2
    tr = sgd(DiscreteDistribution.uniform(ds), StepRule.constant(a), 1, seed=3)
    np.testing.assert_allclose(tr.final_beta, a / 2 * np.array([-3.0, 4.0]), rtol=1e-15)


def test_option_a_average_matches_post_hoc_mean():
    ds = generate_logistic(25, 3, [1, 0, -1], seed=2)
    tr = sgd(DiscreteDistribution.uniform(ds), StepRule.constant(0.05), 200, option="A", seed=10,
             checkpoint_stride=1)
    post = np.mean(tr.checkpoint_betas, axis=0)
    np.testing.assert_allclose(tr.metadata["beta_hat"], post, rtol=1e-12, atol=1e-15)


def test_option_b_output_is_the_indexed_iterate():
    ds = generate_logistic(25, 3, [1, 0, -1], seed=2)
    tr = sgd(DiscreteDistribution.uniform(ds), StepRule.constant(0.05), 150, option="B", seed=12,
             checkpoint_stride=1)
    np.testing.assert_array_equal(tr.metadata["beta_hat"], tr.beta_at(tr.metadata["I_k"]))


def test_option_b_index_is_uniform():
    k, runs = 4, 100_000
    I = option_b_index(np.random.default_rng(0).random((runs, k)))
    counts = np.bincount(I, minlength=k + 1)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_weighted_sampling_frequencies():
    ds = generate_logistic(3, 2, [1, 1], seed=0)
    dist = DiscreteDistribution(ds, np.array([0.5, 0.3, 0.2]))
    idx = dist.indices_from_uniforms(np.random.default_rng(1).random(200_000))
    assert stats.chisquare(np.bincount(idx, minlength=3), 200_000 * dist.weights).pvalue > 1e-3


@pytest.mark.parametrize("option", ["A", "B"])
def test_batch_runs_equal_single_runs(option):
    ds = generate_logistic(15, 2, [1, -1], seed=3)
    dist = DiscreteDistribution.uniform(ds)
    rule = StepRule.rcor(dist.radius_R, 300)
    batch = sgd_trials(dist, rule, 300, option=option, base_seed=42, trials=7, chunk=3, workers=2)
    for t in range(7):
        one = sgd(dist, rule, 300, option=option, seed=trial_seed(42, t))
        np.testing.assert_array_equal(batch.beta_last[t], one.final_beta)
        np.testing.assert_array_equal(batch.beta_hat[t], one.metadata["beta_hat"])
    again = sgd_trials(dist, rule, 300, option=option, base_seed=42, trials=7, chunk=7, workers=1)
    np.testing.assert_array_equal(again.beta_hat, batch.beta_hat)


def test_trial_seeds_are_distinct():
    seeds = {trial_seed(0, t) for t in range(5000)}
    assert len(seeds) == 5000
