"""Bound evaluators: each one turns a trace (or a batch of SGD runs) plus the
conditioning constants into per-item checks with a worst-case slack.

Bounds are always evaluated with the certified side of the condition
numbers (the lower bound of degnsep and the attained margin for degsep), so
a reported ``Holds`` never rests on an optimistic estimate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .conditioning import ConditioningReport, NuStar, Status, analyze, nu_star
from .data import Dataset, DiscreteDistribution, substream
from .errors import NotSeparable, TooFewTrials, UncertifiedConditioning, WrongOption, WrongStepRule
from .loss import LN2, LossContext, loss_gap, loss_gap_terms, loss_value, make_context, softplus_neg
from .norms import Norm, lambda_min_sym, max_row_dual_norm, primal_norm
from .solvers import ReferenceOptimum, SGDBatch, SolverTrace, StepKind, reference_optimum

DEFAULT_TOL = 1e-9
MIN_TRIALS_NONSEP = 1000
MIN_TRIALS_SEP = 500
SE_MULTIPLIER = 3.0


class Verdict(str, enum.Enum):
    HOLDS = "Holds"
    VACUOUS = "Vacuous"
    FAILS = "Fails"
    NOT_APPLICABLE = "NotApplicable"


@dataclass
class ItemCheck:
    """One claim checked at a sequence of indices.

    ``kind="upper"``: observed <= bound + tol.  ``kind="lower"``: observed >=
    bound - tol.  Infinite bounds on the permissive side are vacuous."""

    item: str
    kind: str
    index: np.ndarray
    bound: np.ndarray
    observed: np.ndarray
    tol: float = DEFAULT_TOL
    note: str = ""
    verdict: Verdict = Verdict.NOT_APPLICABLE
    min_slack: float = math.inf
    n_checked: int = 0
    n_vacuous: int = 0

    @classmethod
    def build(cls, item, kind, index, bound, observed, tol=DEFAULT_TOL, note="") -> "ItemCheck":
        index = np.atleast_1d(np.asarray(index))
        bound = np.atleast_1d(np.asarray(bound, dtype=float))
        observed = np.atleast_1d(np.asarray(observed, dtype=float))
        chk = cls(item, kind, index, bound, observed, tol, note)
        chk._decide()
        return chk

    @classmethod
    def not_applicable(cls, item: str, note: str) -> "ItemCheck":
        e = np.zeros(0)
        return cls(item, "upper", e, e, e, DEFAULT_TOL, note)

    def _decide(self):
        if self.kind == "upper":
            vac = self.bound == np.inf
            slack = self.bound - self.observed
        else:
            vac = self.bound == -np.inf
            slack = self.observed - self.bound
        live = ~vac
        self.n_vacuous = int(vac.sum())
        self.n_checked = int(live.sum())
        if self.n_checked == 0:
            self.verdict = Verdict.VACUOUS if self.n_vacuous else Verdict.NOT_APPLICABLE
            return
        s = slack[live]
        if np.any(np.isnan(s)):
            self.min_slack = math.nan
            self.verdict = Verdict.FAILS
            return
        self.min_slack = float(s.min())
        self.verdict = Verdict.FAILS if self.min_slack < -self.tol else Verdict.HOLDS

    def at_last(self) -> tuple[float, float]:
        if self.index.size == 0:
            return math.nan, math.nan
        return float(self.bound[-1]), float(self.observed[-1])

    def to_dict(self, series: bool = False) -> dict:
        b, o = self.at_last()
        d = {"item": self.item, "kind": self.kind, "verdict": self.verdict.value, "min_slack": self.min_slack,
             "bound_at_last": b, "observed_at_last": o, "checked": self.n_checked,
             "vacuous": self.n_vacuous, "tol": self.tol, "note": self.note}
        if self.index.size:
            d["last_index"] = int(self.index[-1])
        if series:
            d["series"] = {"index": self.index, "bound": self.bound, "observed": self.observed}
        return d


@dataclass
class GuaranteeReport:
    theorem: str
    items: list[ItemCheck]
    notes: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(c.verdict is not Verdict.FAILS for c in self.items)

    @property
    def min_slack(self) -> float:
        vals = [c.min_slack for c in self.items if c.verdict is Verdict.HOLDS or c.verdict is Verdict.FAILS]
        return min(vals) if vals else math.inf

    def item(self, name: str) -> ItemCheck:
        for c in self.items:
            if c.item == name:
                return c
        raise KeyError(name)

    def to_dict(self, series: bool = False) -> dict:
        return {"theorem": self.theorem, "holds": self.holds, "min_slack": self.min_slack,
                "items": [c.to_dict(series) for c in self.items], "notes": list(self.notes), "meta": self.meta}

    def table(self) -> str:
        rows = [("item", "bound@last", "observed@last", "min_slack", "verdict")]
        for c in self.items:
            b, o = c.at_last()
            rows.append((c.item, f"{b:.6g}", f"{o:.6g}", f"{c.min_slack:.3g}", c.verdict.value))
        w = [max(len(r[j]) for r in rows) for j in range(5)]
        return "\n".join("  ".join(r[j].ljust(w[j]) for j in range(5)).rstrip() for r in rows)


# ==================================================================== inputs

@dataclass
class GuaranteeInputs:
    """Constants shared by the evaluators for one dataset and norm."""

    distribution: DiscreteDistribution
    norm: Norm
    conditioning: ConditioningReport
    ctx: LossContext
    x_2_inf: float
    x_dot_inf: float
    R: float
    trace_sigma: float
    reference: ReferenceOptimum | None = None
    nu: NuStar | None = None
    lambda_min_H: float | None = None
    gamma: tuple = (0.25, 0.5)

    @property
    def dataset(self) -> Dataset:
        return self.distribution.dataset

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def status(self) -> Status:
        return self.conditioning.status

    @property
    def x_dot_2(self) -> float:
        return self.ctx.x_dot_2

    @property
    def L_star(self) -> float:
        return float(self.reference.loss) if self.reference is not None else math.nan

    @property
    def beta_star(self):
        return None if self.reference is None else self.reference.beta

    def degnsep_lb(self) -> float:
        dn = self.conditioning.degnsep
        if not dn.certified:
            raise UncertifiedConditioning(f"degnsep computed by {dn.method.value} carries no certificate")
        return float(dn.lower_bound)

    def degsep_lb(self) -> float:
        if self.status is not Status.SEPARABLE:
            raise NotSeparable(f"status is {self.status.value}")
        return float(self.conditioning.degsep.lower)

    def initial_gap(self) -> float:
        """ln 2 - L_n* computed without cancellation."""
        return loss_gap(self.ctx, np.zeros(self.ctx.p), self.reference.beta)

    def to_dict(self) -> dict:
        d = {"norm": self.norm.value, "status": self.status.value, "x_dot_2": self.x_dot_2,
             "x_2_inf": self.x_2_inf, "x_dot_inf": self.x_dot_inf, "R": self.R,
             "trace_sigma": self.trace_sigma, "smoothness_L": self.ctx.smoothness_L,
             "conditioning": self.conditioning.to_dict()}
        if self.reference is not None:
            d.update(L_star=self.L_star, beta_star=self.reference.beta,
                     reference_grad_norm=self.reference.grad_norm)
        if self.nu is not None:
            d.update(nu_star=self.nu.value, nu_star_certified=self.nu.certified)
        if self.lambda_min_H is not None:
            d["lambda_min_H"] = self.lambda_min_H
        return d


def build_inputs(data, norm=Norm.L2, tol_ill: float = 1e-8, seed: int = 0, method="auto",
                 gamma=(0.25, 0.5)) -> GuaranteeInputs:
    """Conditioning report, operator norms and (when non-separable) the
    reference optimum with its curvature constants."""
    dist = data if isinstance(data, DiscreteDistribution) else DiscreteDistribution.uniform(data)
    norm = Norm.parse(norm)
    rep = analyze(dist, norm, tol_ill=tol_ill, method=method, seed=seed)
    ctx = make_context(dist, norm)
    X = dist.dataset.X
    inp = GuaranteeInputs(dist, norm, rep, ctx, max_row_dual_norm(Norm.L2, X), max_row_dual_norm(norm, X),
                          dist.radius_R, dist.trace_sigma, gamma=tuple(gamma))
    if rep.status is Status.NON_SEPARABLE:
        ref = reference_optimum(ctx, check_separable=False)
        inp.reference = ref
        inp.nu = nu_star(ref.hessian, norm, seed=seed)
        inp.lambda_min_H = lambda_min_sym(ref.hessian)
    return inp


# ==================================================================== helpers

def _check_norm(inputs: GuaranteeInputs, trace: SolverTrace):
    if trace.norm is not inputs.norm:
        raise ValueError(f"trace norm {trace.norm.value} differs from inputs norm {inputs.norm.value}")


def _need_nonsep(inputs: GuaranteeInputs) -> float:
    D = inputs.degnsep_lb()
    if inputs.status is not Status.NON_SEPARABLE or inputs.reference is None:
        raise UncertifiedConditioning(f"non-separability is not certified (status {inputs.status.value})")
    return D


def _trace_gaps(inputs: GuaranteeInputs, trace: SolverTrace) -> tuple[np.ndarray, np.ndarray]:
    """(indices, L_n(beta^k) - L_n*) at stored iterates, or from the loss column otherwise."""
    bstar = inputs.reference.beta
    if trace.full_iterates:
        A = np.asarray(inputs.dataset.signed_rows)
        B = trace.checkpoint_betas
        terms = loss_gap_terms(B @ A.T, (A @ bstar)[None, :], (bstar[None, :] - B) @ A.T)
        w = inputs.distribution.weights
        gaps = terms.mean(axis=1) if inputs.distribution.is_uniform else terms @ w
        return trace.checkpoint_iters, gaps
    return trace.iters, trace.loss - inputs.L_star


def _dist_to(trace: SolverTrace, point, norm: Norm) -> tuple[np.ndarray, np.ndarray]:
    D = trace.checkpoint_betas - np.asarray(point)[None, :]
    return trace.checkpoint_iters, np.array([primal_norm(norm, d) for d in D])


def _safe_log(a: np.ndarray) -> np.ndarray:
    """ln with ln(a) = -inf for a <= 0."""
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, -np.inf)
    pos = a > 0
    out[pos] = np.log(a[pos])
    return out


def random_references(p: int, seed: int, count: int = 20, scale: float = 1.0) -> np.ndarray:
    """Reference models for the iterate-norm inequality."""
    rng = substream(seed, 4)
    return scale * rng.standard_normal((count, p))


# ==================================================================== steepest descent

def eval_thm_sd_generic(inputs: GuaranteeInputs, trace: SolverTrace, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Generic steepest-descent bounds (gap, two gradient bounds, norm bound)."""
    _check_norm(inputs, trace)
    rule = trace.rule
    if rule.kind not in (StepKind.GREEDY, StepKind.NONSEP):
        raise WrongStepRule(f"needs the greedy rule alpha = ||grad||_*/L, got {rule.kind.value}")
    L = inputs.ctx.smoothness_L if rule.kind is StepKind.NONSEP else float(rule.L)
    rep = GuaranteeReport("3.1", [], meta={"L": L})
    if not trace.metadata.get("guarantees_applicable", True):
        rep.items = [ItemCheck.not_applicable(f"3.1({r})", "run did not start at 0") for r in ("i", "ii", "iii", "iv")]
        return rep
    if L < inputs.ctx.smoothness_L * (1 - 1e-12):
        rep.items = [ItemCheck.not_applicable(f"3.1({r})", "L is below the smoothness constant")
                     for r in ("i", "ii", "iii", "iv")]
        return rep
    if inputs.status is Status.SEPARABLE:
        # f* = 0 is not attained; items needing Dist0 are out of reach
        k, gdn = trace.iters, trace.grad_dual_norm
        gap0 = LN2
        gaps = trace.loss
        rep.items.append(ItemCheck.not_applicable("3.1(i)", "Dist0 is infinite on separable data"))
        rep.items.append(ItemCheck.build("3.1(ii)", "upper", k, np.sqrt(2 * L * np.maximum(gaps, 0)), gdn, tol))
    else:
        D = _need_nonsep(inputs)
        gap0 = inputs.initial_gap()
        dist0 = (LN2 + inputs.L_star) / D
        rep.meta["dist0_bound"] = dist0
        ki, gaps = _trace_gaps(inputs, trace)
        if gap0 > 0:
            K0 = 2 * L * dist0 ** 2 / gap0
            b1 = 2 * L * dist0 ** 2 / (K0 + ki)
            rep.meta["K_hat0"] = K0
        else:
            b1 = np.zeros(ki.size)
        rep.items.append(ItemCheck.build("3.1(i)", "upper", ki, b1, gaps, tol))
        gdn_at = trace.grad_dual_norm[ki]
        rep.items.append(ItemCheck.build("3.1(ii)", "upper", ki, np.sqrt(2 * L * np.maximum(gaps, 0)), gdn_at, tol))
    k = trace.iters
    rep.items.append(ItemCheck.build("3.1(iii)", "upper", k, np.sqrt(k) * np.sqrt(2 * max(gap0, 0) / L),
                                     trace.beta_norm, tol))
    rep.items.append(ItemCheck.build("3.1(iv)", "upper", k, np.sqrt(2 * L * max(gap0, 0) / (k + 1)),
                                     np.minimum.accumulate(trace.grad_dual_norm), tol))
    return rep


def eval_thm32(inputs: GuaranteeInputs, trace: SolverTrace, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Training-error, shrinkage and gradient bounds for the non-separable step rule."""
    _check_norm(inputs, trace)
    if trace.rule.kind is not StepKind.NONSEP:
        raise WrongStepRule(f"needs the NonSepLogit rule, got {trace.rule.kind.value}")
    D = _need_nonsep(inputs)
    rep = GuaranteeReport("3.2", [], meta={"degnsep_lb": D})
    gap0 = inputs.initial_gap()
    if gap0 <= 0 or inputs.L_star >= LN2:
        rep.items = [ItemCheck.not_applicable(f"3.2({r})", "L_n* = ln 2: the optimum is 0 and every bound degenerates")
                     for r in ("i", "ii", "iii")]
        return rep
    X, n = inputs.x_dot_2, inputs.n
    ki, gaps = _trace_gaps(inputs, trace)
    b1 = 1.0 / (1.0 / gap0 + ki * n * D ** 2 / (2 * X ** 2 * LN2 ** 2))
    rep.items.append(ItemCheck.build("3.2(i)", "upper", ki, b1, gaps, tol))
    k = trace.iters
    rep.items.append(ItemCheck.build("3.2(ii)", "upper", k, np.sqrt(k) * np.sqrt(8 * n * gap0) / X,
                                     trace.beta_norm, tol))
    rep.items.append(ItemCheck.build("3.2(iii)", "upper", ki, X * np.sqrt(np.maximum(gaps, 0) / (2 * n)),
                                     trace.grad_dual_norm[ki], tol))
    return rep


@dataclass(frozen=True)
class LinearRates:
    tau_slow: float
    tau_fast: float
    K_check: int


def linear_rates(inputs: GuaranteeInputs) -> LinearRates:
    D = _need_nonsep(inputs)
    if inputs.nu is None or not inputs.nu.certified:
        raise UncertifiedConditioning("nu* of the Hessian at the optimum is not certified")
    nu = inputs.nu.value
    X2, Xi, n = inputs.x_dot_2, inputs.x_dot_inf, inputs.n
    ts = 1 - 2 * D * nu * n / ((D + 2 * LN2 * Xi) * X2 ** 2)
    tf = 1 - nu * n / X2 ** 2
    kc = math.ceil(16 * LN2 ** 2 * X2 ** 4 * Xi ** 2 / (9 * n ** 2 * D ** 2 * nu ** 2))
    return LinearRates(ts, tf, kc)


def eval_thm33(inputs: GuaranteeInputs, trace: SolverTrace, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Slow linear rate for all k, fast rate from the index K_check on."""
    _check_norm(inputs, trace)
    if trace.rule.kind is not StepKind.NONSEP:
        raise WrongStepRule(f"needs the NonSepLogit rule, got {trace.rule.kind.value}")
    D = _need_nonsep(inputs)
    rates = linear_rates(inputs)
    ts, tf, kc = rates.tau_slow, rates.tau_fast, rates.K_check
    nu = inputs.nu.value
    X2, Xi, n = inputs.x_dot_2, inputs.x_dot_inf, inputs.n
    rep = GuaranteeReport("3.3", [], meta={"tau_slow": ts, "tau_fast": tf, "K_check": kc, "nu_star": nu,
                                            "degnsep_lb": D})
    order = ItemCheck.build("3.3(rates)", "upper", [0, 1], [ts, 1.0], [tf, ts], tol=0.0,
                            note="tau_fast < tau_slow < 1")
    if not (tf < ts < 1):
        order.verdict = Verdict.FAILS
    rep.items.append(order)
    gap0 = inputs.initial_gap()
    ki, gaps = _trace_gaps(inputs, trace)
    rep.items.append(ItemCheck.build("3.3(i)", "upper", ki, gap0 * ts ** ki, gaps, tol))
    kd, dist = _dist_to(trace, inputs.beta_star, inputs.norm)
    c2 = (1 + 2 * LN2 * Xi / D) * (X2 / nu) * math.sqrt(max(gap0, 0) / (2 * n))
    rep.items.append(ItemCheck.build("3.3(ii)", "upper", kd, c2 * ts ** (kd / 2), dist, tol))
    if trace.k_max < kc:
        note = f"run ends at k = {trace.k_max} before K_check = {kc}"
        rep.items.append(ItemCheck.not_applicable("3.3(iii)", note))
        rep.items.append(ItemCheck.not_applicable("3.3(iv)", note))
        return rep
    pos = np.searchsorted(ki, kc)
    if pos < ki.size and ki[pos] == kc:
        gap_kc = float(gaps[pos])
    else:
        gap_kc = float(trace.loss[kc] - inputs.L_star)
    m = ki >= kc
    rep.items.append(ItemCheck.build("3.3(iii)", "upper", ki[m], gap_kc * tf ** (ki[m] - kc), gaps[m], tol))
    md = kd >= kc
    c4 = (X2 / nu) * math.sqrt(2 * max(gap_kc, 0) / n)
    rep.items.append(ItemCheck.build("3.3(iv)", "upper", kd[md], c4 * tf ** ((kd[md] - kc) / 2), dist[md], tol))
    return rep


def margin_bound_sd(D: float, n: int, X2inf: float, k) -> np.ndarray:
    """Running-best normalized margin floor of l2 descent on separable data (k >= 1)."""
    k = np.asarray(k, dtype=float)
    arg = D / (n * X2inf) * np.sqrt(3 * (k + 1) / (2 * LN2)) - 1
    return D * _safe_log(arg) / (2 * (np.log(k) + 1))


def shrinkage_bound(D: float, X2inf: float, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return 2 * np.log(k) / D + 2 / X2inf


def eval_thm34(inputs: GuaranteeInputs, trace: SolverTrace, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Margin, shrinkage and gradient bounds of l2 descent on separable data."""
    if trace.rule.kind is not StepKind.SEPL2 or trace.norm is not Norm.L2:
        raise WrongStepRule("needs the SepL2 rule with the l2 norm")
    D = inputs.degsep_lb()
    n, X2inf = inputs.n, inputs.x_2_inf
    rep = GuaranteeReport("3.4", [], meta={"degsep_lb": D})
    k = trace.iters[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(trace.beta_norm > 0, trace.margin / trace.beta_norm, -np.inf)[1:]
    best = np.maximum.accumulate(normalized)
    rep.items.append(ItemCheck.build("3.4(i)", "lower", k, margin_bound_sd(D, n, X2inf, k), best, tol))
    rep.items.append(ItemCheck.build("3.4(ii)", "upper", k, shrinkage_bound(D, X2inf, k), trace.beta_norm[1:], tol))
    rep.items.append(ItemCheck.build("3.4(iii)", "upper", k, X2inf * np.sqrt(2 * LN2 / (3 * (k + 1))),
                                     np.minimum.accumulate(trace.grad_dual_norm)[1:], tol))
    return rep


def margin_gradient_bound(D: float, n: int, grad_dual_norm) -> np.ndarray:
    """ln(D/(n ||grad||_*) - 1) with the -inf convention."""
    g = np.asarray(grad_dual_norm, dtype=float)
    with np.errstate(divide="ignore"):
        arg = np.where(g > 0, D / (n * g), np.inf) - 1
    return _safe_log(arg)


def eval_margin_gradient_lemma(inputs: GuaranteeInputs, trace: SolverTrace, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Margin lower bound from the gradient's dual norm at every iterate."""
    _check_norm(inputs, trace)
    D = inputs.degsep_lb()
    b = margin_gradient_bound(D, inputs.n, trace.grad_dual_norm)
    rep = GuaranteeReport("lemma2.4", [], meta={"degsep_lb": D})
    rep.items.append(ItemCheck.build("lemma2.4", "lower", trace.iters, b, trace.margin, tol))
    return rep


def eval_iterate_bound(inputs: GuaranteeInputs, trace: SolverTrace, refs=None, seed: int = 0,
                       tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Iterate-norm inequality for full-batch gradient steps against reference models.

    Checked as relative slack (RHS - LHS)/max(1, RHS) >= -tol."""
    rep = GuaranteeReport("propA.2", [])
    item = "propA.2"
    X2inf = inputs.x_2_inf
    cap = 2.0 / X2inf ** 2
    if trace.norm is not Norm.L2:
        rep.items.append(ItemCheck.not_applicable(item, "steps are not gradient steps outside the l2 norm"))
        return rep
    if not trace.metadata.get("guarantees_applicable", True):
        rep.items.append(ItemCheck.not_applicable(item, "run did not start at 0"))
        return rep
    g = trace.grad_dual_norm
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(g > 0, trace.step_size / g, 0.0)[:-1]
    refs = random_references(inputs.dataset.p, seed) if refs is None else np.atleast_2d(refs)
    A = np.asarray(inputs.dataset.signed_rows)
    ell = softplus_neg(A @ refs.T).mean(axis=0)        # L_n at each reference
    cum = np.concatenate([[0.0], np.cumsum(raw)])
    ks = trace.checkpoint_iters
    B = trace.checkpoint_betas
    lhs = np.sum((B[:, None, :] - refs[None, :, :]) ** 2, axis=2)
    rhs = np.sum(refs * refs, axis=1)[None, :] + 2 * cum[ks][:, None] * ell[None, :]
    rel = ((rhs - lhs) / np.maximum(1.0, rhs)).min(axis=1)
    rep.meta["max_raw_step"] = float(raw.max()) if raw.size else 0.0
    rep.meta["step_cap"] = cap
    if raw.size and raw.max() > cap * (1 + 1e-12):
        rep.items.append(ItemCheck.not_applicable(
            item, f"step {raw.max():.6g} exceeds 2/||X||_(2,inf)^2 = {cap:.6g}; "
                  f"informational min relative slack {rel.min():.3g}"))
        rep.meta["informational_min_slack"] = float(rel.min())
        return rep
    rep.items.append(ItemCheck.build(item, "lower", ks, np.zeros(ks.size), rel, tol))
    return rep


def eval_iterate_bound_sgd(inputs: GuaranteeInputs, batch: SGDBatch, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Same inequality for single-sample steps, from the slack tracked during the runs."""
    rep = GuaranteeReport("propA.2", [])
    cap = 2.0 / inputs.x_2_inf ** 2
    if batch.iterate_bound_slack is None:
        rep.items.append(ItemCheck.not_applicable("propA.2", "runs did not track the inequality"))
    elif batch.alpha > cap * (1 + 1e-12):
        rep.items.append(ItemCheck.not_applicable("propA.2", f"step {batch.alpha:.6g} exceeds {cap:.6g}"))
    else:
        rep.items.append(ItemCheck.build("propA.2", "lower", np.arange(batch.trials), np.zeros(batch.trials),
                                         batch.iterate_bound_slack, tol))
    return rep


def eval_prop21(inputs: GuaranteeInputs, count: int = 100, seed: int = 0, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Norm of the optimum and the level-set distance bound on random points."""
    D = _need_nonsep(inputs)
    ctx, norm = inputs.ctx, inputs.norm
    bstar, Ls = inputs.beta_star, inputs.L_star
    rep = GuaranteeReport("2.1", [], meta={"degnsep_lb": D})
    rep.items.append(ItemCheck.build("2.1(iii)", "upper", [0], [Ls / D], [primal_norm(norm, bstar)], tol))
    pts = level_set_points(ctx, count, seed)
    d = [primal_norm(norm, b - bstar) for b in pts]
    rep.items.append(ItemCheck.build("2.1(iv)", "upper", np.arange(len(pts)), np.full(len(pts), (LN2 + Ls) / D),
                                     d, tol))
    return rep


def level_set_points(ctx: LossContext, count: int, seed: int) -> np.ndarray:
    """Random points of {L_n <= ln 2}: half on its boundary, half inside, along random rays."""
    rng = substream(seed, 6)
    p = ctx.p
    out = []
    for j in range(count):
        u = rng.standard_normal(p)
        u /= primal_norm(ctx.norm, u)
        lo, hi = 0.0, 1.0
        while loss_value(ctx, hi * u) <= LN2 and hi < 1e12:
            lo, hi = hi, 2 * hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if loss_value(ctx, mid * u) <= LN2:
                lo = mid
            else:
                hi = mid
        r = lo if j % 2 == 0 else lo * rng.random()
        out.append(r * u)
    return np.array(out)


# ==================================================================== SGD

def _mean_se(v: np.ndarray) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size))


def _expectation_item(item: str, bound: float, samples: np.ndarray, note: str = "") -> ItemCheck:
    mean, se = _mean_se(samples)
    chk = ItemCheck.build(item, "upper", [0], [bound + SE_MULTIPLIER * se], [mean], tol=0.0,
                          note=(note + "; " if note else "") + f"mean {mean:.6g} +/- {se:.3g} (SE) vs bound {bound:.6g}")
    return chk


def second_moment_check(inputs: GuaranteeInputs, draws: int = 100_000, seed: int = 0, points: int = 5) -> ItemCheck:
    """Monte-Carlo mean of ||stochastic gradient||_2^2 at random models vs Tr(Sigma)."""
    dist = inputs.distribution
    A = np.asarray(dist.dataset.signed_rows)
    sq = np.sum(A * A, axis=1)
    tr = inputs.trace_sigma
    means, bounds = [], []
    for j in range(points):
        rng = substream(seed, 5, j)
        beta = rng.standard_normal(A.shape[1])
        idx = dist.indices_from_uniforms(rng.random(draws))
        t = A[idx] @ beta
        g2 = (1.0 / (1.0 + np.exp(np.clip(t, -700, 700)))) ** 2 * sq[idx]
        m, se = _mean_se(g2)
        means.append(m)
        bounds.append(tr + SE_MULTIPLIER * se)
    return ItemCheck.build("4.3(premise)", "upper", np.arange(points), bounds, means, tol=0.0,
                           note=f"Tr(Sigma) = {tr:.6g}")


def eval_sgd_nonsep(inputs: GuaranteeInputs, batch: SGDBatch, second_moment_draws: int = 100_000,
                    seed: int = 0) -> GuaranteeReport:
    """Expected-gap and iterate-distance bounds for SGD on non-separable data,
    each tested one-sidedly as mean <= bound + 3 SE."""
    if batch.rule.kind not in (StepKind.CONSTANT_SGD, StepKind.RCOR_SGD):
        raise WrongStepRule(f"needs an SGD step rule, got {batch.rule.kind.value}")
    if inputs.norm is not Norm.L2:
        raise ValueError("SGD bounds are stated in the l2 norm")
    D = _need_nonsep(inputs)
    if batch.trials < MIN_TRIALS_NONSEP:
        raise TooFewTrials(f"{batch.trials} trials; at least {MIN_TRIALS_NONSEP} required")
    A = np.asarray(inputs.dataset.signed_rows)
    bstar = inputs.beta_star
    terms = loss_gap_terms(batch.beta_hat @ A.T, (A @ bstar)[None, :], (bstar[None, :] - batch.beta_hat) @ A.T)
    w = inputs.distribution.weights
    gaps = terms.mean(axis=1) if inputs.distribution.is_uniform else terms @ w
    k, alpha, tr = batch.k, batch.alpha, inputs.trace_sigma
    rep = GuaranteeReport("4.x", [], meta={"degnsep_lb": D, "alpha": alpha, "k": k, "trials": batch.trials,
                                            "trace_sigma": tr, "option": batch.option})
    b42 = LN2 ** 2 / (2 * alpha * (k + 1) * D ** 2) + alpha * tr / 2
    rep.items.append(_expectation_item("4.2", b42, gaps))
    rep.items.append(second_moment_check(inputs, second_moment_draws, seed))
    rule = batch.rule
    if rule.kind is StepKind.RCOR_SGD:
        R = rule.R
        if tr <= R ** 2 * (1 + 1e-12):
            b43 = LN2 / (2 * math.sqrt(k + 1)) * (R ** 2 / D ** 2 + 1)
            rep.items.append(_expectation_item("4.3", b43, gaps))
        else:
            rep.items.append(ItemCheck.not_applicable("4.3", "Tr(Sigma) exceeds R^2"))
        if batch.option != "A":
            note = "Option A only"
            rep.items += [ItemCheck.not_applicable("4.4(i)", note), ItemCheck.not_applicable("4.4(ii)", note)]
        elif inputs.R > R * (1 + 1e-12):
            note = "some ||x_i||_2 exceeds R"
            rep.items += [ItemCheck.not_applicable("4.4(i)", note), ItemCheck.not_applicable("4.4(ii)", note)]
        else:
            lam = inputs.lambda_min_H
            b1 = R ** 2 / (lam * (k + 1)) * (10 * R * LN2 ** 2 / D + 15) ** 4
            b2 = R ** 2 / (lam ** 2 * (k + 1)) * (12 * R * LN2 ** 2 / D + 21) ** 4
            dist2 = np.sum((batch.beta_hat - bstar[None, :]) ** 2, axis=1)
            rep.items.append(_expectation_item("4.4(i)", b1, gaps))
            rep.items.append(_expectation_item("4.4(ii)", b2, dist2))
            rep.meta["lambda_min_H"] = lam
    else:
        note = "needs the R-based step size"
        rep.items += [ItemCheck.not_applicable(x, note) for x in ("4.3", "4.4(i)", "4.4(ii)")]
    return rep


def sgd_margin_bound(D: float, n: int, R: float, gamma: float, k: int) -> float:
    arg = D * math.sqrt(gamma) * (k + 1) ** 0.25 / (n * R * math.sqrt(1.1)) - 1
    if arg <= 0:
        return -math.inf
    return D * math.log(arg) / (2 * (math.log(k) + 1))


def option_b_uniformity(I: np.ndarray, k: int, bins: int = 10, level: float = 0.99) -> ItemCheck:
    """Chi-square test that I_k is uniform on {0..k}, over ``bins`` groups of indices."""
    I = np.asarray(I)
    bins = min(bins, k + 1)
    edges = np.floor(np.arange(bins + 1) * (k + 1) / bins).astype(np.int64)
    probs = np.diff(edges) / (k + 1)
    counts = np.histogram(I, bins=edges - 0.5)[0]
    expected = probs * I.size
    stat = float(np.sum((counts - expected) ** 2 / expected))
    crit = float(stats.chi2.ppf(level, bins - 1))
    return ItemCheck.build("optionB(uniform)", "upper", [0], [crit], [stat], tol=0.0,
                           note=f"chi2 with {bins - 1} dof at {level:.0%}")


def eval_sgd_sep(inputs: GuaranteeInputs, batch: SGDBatch, gammas=None, tol: float = DEFAULT_TOL) -> GuaranteeReport:
    """Margin coverage, shrinkage and expected squared-gradient bounds for Option B SGD on separable data."""
    if batch.option != "B":
        raise WrongOption("needs Option B")
    if batch.rule.kind is not StepKind.RCOR_SGD:
        raise WrongStepRule(f"needs the R-based step size, got {batch.rule.kind.value}")
    D = inputs.degsep_lb()
    if batch.trials < MIN_TRIALS_SEP:
        raise TooFewTrials(f"{batch.trials} trials; at least {MIN_TRIALS_SEP} required")
    gammas = inputs.gamma if gammas is None else tuple(gammas)
    n, k, T = inputs.n, batch.k, batch.trials
    R = batch.rule.R
    X2inf = inputs.x_2_inf
    A = np.asarray(inputs.dataset.signed_rows)
    rep = GuaranteeReport("4.5", [], meta={"degsep_lb": D, "alpha": batch.alpha, "k": k, "trials": T, "R": R})
    if inputs.R > R * (1 + 1e-12):
        note = "some ||x_i||_2 exceeds R"
        rep.items = [ItemCheck.not_applicable(x, note) for x in ("4.5(i)", "4.5(ii)", "4.5(iii)")]
        return rep
    hat = batch.beta_hat
    hn = np.linalg.norm(hat, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(hn > 0, (hat @ A.T).min(axis=1) / hn, -np.inf)
    for g in gammas:
        b = sgd_margin_bound(D, n, R, g, k)
        need = (1 - g) - 3 * math.sqrt(g * (1 - g) / T)
        name = f"4.5(i) gamma={g:g}"
        if b == -math.inf:
            rep.items.append(ItemCheck.build(name, "lower", [0], [-math.inf], [math.nan],
                                             note="log argument <= 1"))
            continue
        cover = float(np.mean(rho > b))
        rep.items.append(ItemCheck.build(name, "lower", [0], [need], [cover], tol=0.0,
                                         note=f"margin floor {b:.6g}; coverage {cover:.4f} vs {need:.4f}"))
    cap = 2.0 / X2inf ** 2
    if batch.alpha > cap * (1 + 1e-12):
        rep.items.append(ItemCheck.not_applicable("4.5(ii)", f"step exceeds 2/||X||_(2,inf)^2 = {cap:.6g}"))
    elif batch.beta_norms is None:
        rep.items.append(ItemCheck.not_applicable("4.5(ii)", "iterate norms were not tracked"))
    else:
        m = np.arange(1, k + 1)
        worst = (batch.beta_norms[:, 1:] - shrinkage_bound(D, X2inf, m)[None, :]).max(axis=0)
        # per index: worst run, plus the output iterate at index k
        obs = np.concatenate([worst, [hn.max() - shrinkage_bound(D, X2inf, k)]])
        rep.items.append(ItemCheck.build("4.5(ii)", "upper", np.concatenate([m, [k]]), np.zeros(obs.size), obs, tol,
                                         note="observed is max over runs of ||beta|| minus the bound"))
    sig = 1.0 / (1.0 + np.exp(np.clip(hat @ A.T, -700, 700)))
    grads = -(sig @ A) / n
    g2 = np.sum(grads * grads, axis=1)
    rep.items.append(_expectation_item("4.5(iii)", 1.1 * R ** 2 / math.sqrt(k + 1), g2))
    rep.items.append(option_b_uniformity(batch.index_I, k))
    return rep
