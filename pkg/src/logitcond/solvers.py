"""Steepest descent in a chosen norm, SGD with averaged or sampled output,
and a damped-Newton reference optimizer."""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.special import expit

from .conditioning import degsep
from .data import DiscreteDistribution, fmt_float, substream
from .errors import NotAttained, WrongOption, WrongStepRule
from .loss import LN2, LossContext, hessian, loss_and_gradient, loss_value, make_context, softplus_neg
from .norms import Norm, dual_norm, max_row_dual_norm, primal_norm, unit_maximizer
from .runtime import parallel_map

TRACE_COLUMNS = ("iter", "loss", "grad_dual_norm", "margin", "beta_norm", "step_size")


class StepKind(str, enum.Enum):
    GREEDY = "GreedyOverL"
    NONSEP = "NonSepLogit"
    SEPL2 = "SepL2"
    CONSTANT_SGD = "ConstantSGD"
    RCOR_SGD = "RCorSGD"

    @property
    def deterministic(self) -> bool:
        return self in (StepKind.GREEDY, StepKind.NONSEP, StepKind.SEPL2)


@dataclass(frozen=True)
class StepRule:
    kind: StepKind
    L: float | None = None          # GreedyOverL
    alpha: float | None = None      # ConstantSGD
    R: float | None = None          # RCorSGD
    horizon: int | None = None      # RCorSGD

    @classmethod
    def greedy(cls, L: float) -> "StepRule":
        return cls(StepKind.GREEDY, L=float(L))

    @classmethod
    def nonsep(cls) -> "StepRule":
        return cls(StepKind.NONSEP)

    @classmethod
    def sepl2(cls) -> "StepRule":
        return cls(StepKind.SEPL2)

    @classmethod
    def constant(cls, alpha: float) -> "StepRule":
        return cls(StepKind.CONSTANT_SGD, alpha=float(alpha))

    @classmethod
    def rcor(cls, R: float, horizon: int) -> "StepRule":
        return cls(StepKind.RCOR_SGD, R=float(R), horizon=int(horizon))

    def sgd_alpha(self) -> float:
        if self.kind is StepKind.CONSTANT_SGD:
            return float(self.alpha)
        if self.kind is StepKind.RCOR_SGD:
            return LN2 / (self.R ** 2 * np.sqrt(self.horizon + 1.0))
        raise WrongStepRule(f"{self.kind.value} is not an SGD step rule")

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        for k in ("L", "alpha", "R", "horizon"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d


@dataclass
class SolverTrace:
    """Per-iteration scalars plus checkpointed iterates and run metadata."""

    iters: np.ndarray
    loss: np.ndarray
    grad_dual_norm: np.ndarray
    margin: np.ndarray
    beta_norm: np.ndarray
    step_size: np.ndarray
    checkpoint_iters: np.ndarray
    checkpoint_betas: np.ndarray
    final_beta: np.ndarray
    norm: Norm
    rule: StepRule
    metadata: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return int(self.iters[-1])

    @property
    def full_iterates(self) -> bool:
        return self.checkpoint_iters.size == self.iters.size

    def beta_at(self, k: int) -> np.ndarray:
        pos = np.searchsorted(self.checkpoint_iters, k)
        if pos >= self.checkpoint_iters.size or self.checkpoint_iters[pos] != k:
            raise KeyError(f"iterate {k} was not checkpointed")
        return self.checkpoint_betas[pos]

    def to_csv_text(self, comments=()) -> str:
        out = io.StringIO()
        for c in comments:
            out.write(f"# {c}\n")
        out.write(",".join(TRACE_COLUMNS) + "\n")
        for row in zip(self.iters, self.loss, self.grad_dual_norm, self.margin, self.beta_norm, self.step_size):
            out.write(str(int(row[0])) + "," + ",".join(fmt_float(v) for v in row[1:]) + "\n")
        return out.getvalue()

    def betas_csv_text(self, comments=()) -> str:
        out = io.StringIO()
        for c in comments:
            out.write(f"# {c}\n")
        p = self.checkpoint_betas.shape[1]
        out.write(",".join(["iter"] + [f"beta{j + 1}" for j in range(p)]) + "\n")
        for k, b in zip(self.checkpoint_iters, self.checkpoint_betas):
            out.write(str(int(k)) + "," + ",".join(fmt_float(v) for v in b) + "\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        return {"norm": self.norm.value, "rule": self.rule.to_dict(), "k_max": self.k_max,
                "final_beta": self.final_beta.tolist(), "metadata": self.metadata,
                "final": {c: float(getattr(self, c)[-1]) for c in TRACE_COLUMNS[1:]}}


def _step_size(rule: StepRule, gdn: float, ctx: LossContext, x2inf: float) -> float:
    if rule.kind is StepKind.GREEDY:
        return gdn / rule.L
    if rule.kind is StepKind.NONSEP:
        return 4.0 * ctx.n * gdn / ctx.x_dot_2 ** 2
    return 2.0 * gdn / x2inf ** 2


def steepest_descent(ctx: LossContext, step_rule: StepRule, k_max: int, checkpoint_stride: int = 100,
                     norm=None, beta0=None) -> SolverTrace:
    """Normalized steepest descent b <- b - alpha_k d_k, d_k = unit_maximizer(grad).

    Starts at 0 unless ``beta0`` is given (then the trace is marked as not
    covered by the guarantees).  Stops early only at an exactly zero gradient."""
    norm = Norm.parse(norm or ctx.norm)
    if not step_rule.kind.deterministic:
        raise WrongStepRule(f"{step_rule.kind.value} is not a deterministic step rule")
    if step_rule.kind is StepKind.SEPL2 and norm is not Norm.L2:
        raise WrongStepRule("the separable step rule is defined for the l2 norm")
    if step_rule.kind is StepKind.NONSEP and norm is not ctx.norm:
        raise WrongStepRule("context norm differs from the run norm")
    stride = max(1, int(checkpoint_stride))
    p = ctx.p
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    x2inf = max_row_dual_norm(Norm.L2, ctx.dataset.X)
    K = int(k_max)
    rec = np.empty((K + 1, 5))
    ck_iters, ck_betas = [], []
    stationary = False
    last = K
    for k in range(K + 1):
        f, g, t = loss_and_gradient(ctx, beta)
        gdn = dual_norm(norm, g)
        alpha = _step_size(step_rule, gdn, ctx, x2inf) if gdn > 0 else 0.0
        rec[k] = (f, gdn, float(np.min(t)), primal_norm(norm, beta), alpha)
        if k % stride == 0 or k == K or gdn == 0.0:
            ck_iters.append(k)
            ck_betas.append(beta.copy())
        if gdn == 0.0:
            stationary = True
            last = k
            break
        if k < K:
            beta = beta - alpha * unit_maximizer(norm, g)
    rec = rec[:last + 1]
    meta = {"beta0_zero": beta0 is None or not np.any(beta0),
            "guarantees_applicable": beta0 is None or not np.any(beta0),
            "stationary_exact": stationary, "checkpoint_stride": stride, "n": ctx.n, "p": p}
    return SolverTrace(np.arange(last + 1), rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3], rec[:, 4],
                       np.array(ck_iters), np.array(ck_betas).reshape(len(ck_iters), p), beta.copy(),
                       norm, step_rule, meta)


# ==================================================================== SGD

def trial_seed(base_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial`` derived by hashing (base_seed, trial)."""
    ss = np.random.SeedSequence(int(base_seed) & ((1 << 64) - 1), spawn_key=(3, int(trial)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def sgd_draws(dist: DiscreteDistribution, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample indices and Option-B uniforms of one run."""
    rng = substream(seed, 2)
    u = rng.random(k)
    ub = rng.random(k)
    return dist.indices_from_uniforms(u), ub


def option_b_index(uniforms: np.ndarray) -> np.ndarray:
    """I_k from the recursion I_m = m with prob 1/(m+1), else I_{m-1}; rows are runs."""
    uniforms = np.atleast_2d(uniforms)
    T, k = uniforms.shape
    idx = np.zeros(T, dtype=np.int64)
    for i in range(k):
        m = i + 1
        idx = np.where(uniforms[:, i] < 1.0 / (m + 1), m, idx)
    return idx


def _rowdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # fixed summation order, so a trial gives identical bits in any batch
    t = a[:, 0] * b[:, 0]
    for j in range(1, a.shape[1]):
        t = t + a[:, j] * b[:, j]
    return t


def _sgd_kernel(A: np.ndarray, idx: np.ndarray, ub: np.ndarray, alpha: float, option: str
                ) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Yields (m, beta^m, beta_hat^m, I_m, sampled rows) for m = 1..k over a batch of runs."""
    T, k = idx.shape
    p = A.shape[1]
    beta = np.zeros((T, p))
    hat = np.zeros((T, p))
    I = np.zeros(T, dtype=np.int64)
    for i in range(k):
        a = A[idx[:, i]]
        t = _rowdot(a, beta)
        beta = beta + (alpha * expit(-t))[:, None] * a
        m = i + 1
        if option == "A":
            hat = (m / (m + 1.0)) * hat + (1.0 / (m + 1.0)) * beta
        else:
            sw = ub[:, i] < 1.0 / (m + 1)
            I = np.where(sw, m, I)
            hat = np.where(sw[:, None], beta, hat)
        yield m, beta, hat, I, idx[:, i]


def _check_option(option: str) -> str:
    opt = str(option).upper()
    if opt not in ("A", "B"):
        raise WrongOption(f"option must be A or B, got {option!r}")
    return opt


def sgd(dist: DiscreteDistribution, step_rule: StepRule, k: int, option: str = "A", seed: int = 0,
        checkpoint_stride: int = 100) -> SolverTrace:
    """One SGD run with sampling with replacement, from beta^0 = 0.

    Trace rows describe the raw iterates beta^m; ``metadata`` holds the
    output beta_hat^k (running average for Option A, beta^{I_k} for B)."""
    opt = _check_option(option)
    if isinstance(dist, LossContext):
        dist = dist.distribution
    if not isinstance(dist, DiscreteDistribution):
        dist = DiscreteDistribution.uniform(dist)
    alpha = step_rule.sgd_alpha()
    ctx = make_context(dist, Norm.L2)
    A = np.asarray(dist.dataset.signed_rows)
    idx, ub = sgd_draws(dist, k, seed)
    stride = max(1, int(checkpoint_stride))
    p = A.shape[1]
    rec = np.empty((k + 1, 5))
    ck_iters, ck_betas = [0], [np.zeros(p)]

    def record(m, b):
        f, g, t = loss_and_gradient(ctx, b)
        rec[m] = (f, float(np.linalg.norm(g)), float(np.min(t)), float(np.linalg.norm(b)), alpha)

    record(0, np.zeros(p))
    hat = np.zeros(p)
    I = 0
    beta = np.zeros(p)
    for m, beta_b, hat_b, I_b, _ in _sgd_kernel(A, idx[None, :], ub[None, :], alpha, opt):
        beta, hat, I = beta_b[0], hat_b[0], int(I_b[0])
        record(m, beta)
        if m % stride == 0 or m == k:
            ck_iters.append(m)
            ck_betas.append(beta.copy())
    meta = {"seed": int(seed), "option": opt, "alpha": alpha, "beta_hat": hat.tolist(),
            "I_k": I if opt == "B" else None, "guarantees_applicable": True,
            "checkpoint_stride": stride, "n": dist.dataset.n, "p": p,
            "sampled_indices_sha": _digest(idx)}
    return SolverTrace(np.arange(k + 1), rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3], rec[:, 4],
                       np.array(ck_iters), np.array(ck_betas), beta.copy(), Norm.L2, step_rule, meta)


def _digest(a: np.ndarray) -> str:
    import hashlib
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()[:16]


@dataclass
class SGDBatch:
    """Outputs of many independent seeded SGD runs on one distribution."""

    seeds: np.ndarray
    option: str
    alpha: float
    k: int
    rule: StepRule
    beta_hat: np.ndarray
    beta_last: np.ndarray
    index_I: np.ndarray
    beta_norms: np.ndarray | None
    iterate_bound_slack: np.ndarray | None
    refs: np.ndarray | None
    base_seed: int

    @property
    def trials(self) -> int:
        return int(self.seeds.size)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "option": self.option, "alpha": self.alpha, "k": self.k,
                "rule": self.rule.to_dict(), "base_seed": self.base_seed,
                "beta_hat_digest": _digest(self.beta_hat)}


def _run_chunk(A, dist, seeds, k, alpha, opt, track_norms, refs):
    T = len(seeds)
    idx = np.empty((T, k), dtype=np.int64)
    ub = np.empty((T, k))
    for r, s in enumerate(seeds):
        idx[r], ub[r] = sgd_draws(dist, k, int(s))
    norms = np.zeros((T, k + 1)) if track_norms else None
    slack = None
    if refs is not None:
        ell_ref = softplus_neg(A @ refs.T)                 # n x r
        ref_sq = np.sum(refs * refs, axis=1)               # r
        cum = np.zeros((T, refs.shape[0]))
        slack = np.full(T, np.inf)
    beta = hat = I = None
    for m, beta, hat, I, rows in _sgd_kernel(A, idx, ub, alpha, opt):
        if track_norms:
            norms[:, m] = np.sqrt(_rowdot(beta, beta))
        if refs is not None:
            cum += alpha * ell_ref[rows]
            diff = beta[:, None, :] - refs[None, :, :]
            lhs = np.sum(diff * diff, axis=2)
            rhs = ref_sq[None, :] + 2.0 * cum
            rel = (rhs - lhs) / np.maximum(1.0, rhs)
            slack = np.minimum(slack, rel.min(axis=1))
    return beta.copy(), hat.copy(), I.copy(), norms, slack


def sgd_trials(dist: DiscreteDistribution, step_rule: StepRule, k: int, option: str = "A",
               base_seed: int = 0, trials: int = 1000, refs=None, track_norms: bool = True,
               workers: int | None = None, chunk: int = 250) -> SGDBatch:
    """Independent SGD runs; run ``t`` uses seed ``trial_seed(base_seed, t)``.

    Runs are vectorized in chunks and chunks may be spread over workers;
    every run's result is independent of chunking and scheduling.  With
    ``refs`` the iterate-norm inequality against each reference model is
    tracked at every step (minimum relative slack per run)."""
    opt = _check_option(option)
    if not isinstance(dist, DiscreteDistribution):
        dist = DiscreteDistribution.uniform(dist)
    alpha = step_rule.sgd_alpha()
    A = np.asarray(dist.dataset.signed_rows)
    seeds = np.array([trial_seed(base_seed, t) for t in range(trials)], dtype=np.uint64)
    refs_arr = None if refs is None else np.atleast_2d(np.asarray(refs, dtype=float))
    chunks = [seeds[i:i + chunk] for i in range(0, trials, chunk)]
    out = parallel_map(lambda s: _run_chunk(A, dist, s, k, alpha, opt, track_norms, refs_arr), chunks, workers)
    beta_last = np.concatenate([o[0] for o in out])
    beta_hat = np.concatenate([o[1] for o in out])
    I = np.concatenate([o[2] for o in out])
    norms = np.concatenate([o[3] for o in out]) if track_norms else None
    slack = np.concatenate([o[4] for o in out]) if refs_arr is not None else None
    return SGDBatch(seeds, opt, alpha, k, step_rule, beta_hat, beta_last, I, norms, slack, refs_arr, int(base_seed))


# ==================================================================== reference optimum

@dataclass(frozen=True)
class ReferenceOptimum:
    beta: np.ndarray
    loss: float
    hessian: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool


def reference_optimum(ctx: LossContext, tol: float = 1e-12, max_iter: int = 500,
                      check_separable: bool = True, tol_ill: float = 1e-8) -> ReferenceOptimum:
    """Damped Newton from 0 to ||grad||_2 <= tol, then a few polishing steps."""
    if check_separable and degsep(ctx.dataset, Norm.L2).value > tol_ill:
        raise NotAttained("data is separable; the loss has no minimizer")
    beta = np.zeros(ctx.p)
    f, g, _ = loss_and_gradient(ctx, beta)
    gn = float(np.linalg.norm(g))
    it = 0
    polish = 0
    while it < max_iter:
        if gn <= tol:
            polish += 1
            if polish > 3:
                break
        H = hessian(ctx, beta)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        if not np.all(np.isfinite(step)) or not np.any(step):
            break
        s = 1.0
        slope = float(g @ step)
        while True:
            cand = beta - s * step
            fc, gc, _ = loss_and_gradient(ctx, cand)
            gcn = float(np.linalg.norm(gc))
            if fc <= f - 1e-4 * s * slope or (s < 1.0 and gcn < gn and fc <= f):
                break
            if gn <= 1e-6 and gcn < gn:
                # near the optimum the loss cannot resolve progress; trust the gradient
                break
            s *= 0.5
            if s < 1e-16:
                cand = None
                break
        it += 1
        if cand is None or (gn <= tol and gcn >= gn):
            break
        beta, f, g, gn = cand, fc, gc, gcn
        if np.linalg.norm(beta) > 1e8:
            raise NotAttained("iterates diverge; data appears separable")
    return ReferenceOptimum(beta, loss_value(ctx, beta), hessian(ctx, beta), gn, it, gn <= tol)
