"""Degree-of-separability condition numbers and the perturbations they measure.

``degsep``   max_{||b|| <= 1} min_i y_i b.x_i  =  min_{lam in simplex} ||X'Y lam||_*
``degnsep``  min_{||b|| = 1} mean_i [y_i b.x_i]^-

degsep comes with a two-sided certificate (a simplex point for the upper
value, a feasible model for the lower value).  degnsep is nonconvex; it is
certified for p <= 2 (angular branch and bound), for the l1 sphere with
p <= 12 and for the l-infinity sphere (facet-wise linear programs), and
is an upper bound otherwise.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .data import Dataset, DiscreteDistribution, substream
from .errors import MethodUnavailable, NotApplicable
from .norms import (
    Norm, OperatorNorms, dual_norm, lambda_min_sym, operator_norms, primal_norm,
    rowwise_norm, unit_maximizer,
)

LN2 = float(np.log(2.0))
DEFAULT_TOL_ILL = 1e-8
GRID_TOL = 1e-6
FACET_L1_MAX_P = 12

_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
_LP_SLACK = 1e-9


class Status(str, enum.Enum):
    SEPARABLE = "Separable"
    NON_SEPARABLE = "NonSeparable"
    ILL_POSED = "IllPosed"


class DegNSEPMethod(str, enum.Enum):
    CERTIFIED_GRID = "CertifiedGrid"
    FACET_EXACT = "FacetExact"
    HEURISTIC = "Heuristic"

    @property
    def certified(self) -> bool:
        return self is not DegNSEPMethod.HEURISTIC


def _as_distribution(data) -> DiscreteDistribution:
    return data if isinstance(data, DiscreteDistribution) else DiscreteDistribution.uniform(data)


def margin(dataset: Dataset, beta) -> float:
    """rho(b) = min_i y_i b.x_i."""
    return float(np.min(dataset.signed_rows @ np.asarray(beta, dtype=float)))


# ==================================================================== degsep

@dataclass(frozen=True)
class DegSEPResult:
    value: float            # upper value ||X'Y lam||_*
    lam: np.ndarray         # simplex point
    beta: np.ndarray        # feasible model, ||beta|| <= 1
    lower: float            # max(0, rho(beta))
    gap: float
    converged: bool
    method: str

    def to_dict(self) -> dict:
        return {"value": self.value, "lower": self.lower, "gap": self.gap,
                "converged": self.converged, "method": self.method,
                "lambda": self.lam.tolist(), "beta": self.beta.tolist()}


def min_norm_point(P: np.ndarray, tol: float = 1e-12, max_iter: int | None = None):
    """Wolfe's algorithm: the minimum-l2-norm point of conv(rows of P).

    Returns (weights over rows, the point, converged)."""
    P = np.asarray(P, dtype=float)
    m, p = P.shape
    sq = np.sum(P * P, axis=1)
    scale = max(float(np.max(sq)), 1e-300)
    j0 = int(np.argmin(sq))
    S = [j0]
    lam = np.array([1.0])
    x = P[j0].copy()
    max_iter = max_iter or (50 * m + 200)
    converged = False
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if float(x @ x) - dots[j] <= tol * scale or not np.any(x):
            converged = True
            break
        if j in S:
            # no improving vertex outside the corral: numerically optimal
            converged = float(x @ x) - dots[j] <= 1e-9 * scale
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        for _minor in range(len(S) + p + 5):
            Q = P[S]
            k = len(S)
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = Q @ Q.T
            K[:k, k] = 1.0
            K[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                mu = np.linalg.solve(K, rhs)[:k]
            except np.linalg.LinAlgError:
                mu = np.linalg.lstsq(K, rhs, rcond=None)[0][:k]
            if np.all(mu > 1e-14):
                lam = mu
                break
            neg = mu <= 1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg & (lam - mu > 0), lam / (lam - mu), np.inf)
            theta = float(min(np.min(ratios), 1.0))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-14
            if not np.any(keep):
                keep[int(np.argmax(lam))] = True
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    weights = np.zeros(m)
    weights[S] = lam
    return weights, x, converged


def _degsep_wolfe(A: np.ndarray) -> DegSEPResult:
    lam, z, ok = min_norm_point(A)
    value = float(np.linalg.norm(A.T @ lam))
    if value > 0:
        beta = z / np.linalg.norm(z)
        rho = float(np.min(A @ beta))
        if rho <= 0:
            beta = np.zeros(A.shape[1])
            rho = 0.0
    else:
        beta = np.zeros(A.shape[1])
        rho = 0.0
    lower = max(0.0, rho)
    return DegSEPResult(value, lam, beta, lower, max(0.0, value - lower), ok, "wolfe")


def _degsep_lp(A: np.ndarray, norm: Norm) -> DegSEPResult:
    n, p = A.shape
    # primal: max t  s.t.  A b >= t,  ||b|| <= 1
    if norm is Norm.L1:
        # b = b+ - b-, variables (b+, b-, t)
        c = np.zeros(2 * p + 1)
        c[-1] = -1.0
        A_ub = np.vstack([np.hstack([-A, A, np.ones((n, 1))]),
                          np.hstack([np.ones(2 * p), [0.0]])[None, :]])
        b_ub = np.zeros(n + 1)
        b_ub[-1] = 1.0
        bounds = [(0, None)] * (2 * p) + [(None, None)]
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs", options=_HIGHS)
        beta = res.x[:p] - res.x[p:2 * p]
    else:
        c = np.zeros(p + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-A, np.ones((n, 1))])
        bounds = [(-1, 1)] * p + [(None, None)]
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), bounds=bounds, method="highs", options=_HIGHS)
        beta = res.x[:p]
    nb = primal_norm(norm, beta)
    if nb > 1:
        beta = beta / nb
    # dual: min ||A' lam||_*  over the simplex
    if norm is Norm.L1:
        # variables (lam, s): -s <= (A'lam)_j <= s
        c = np.zeros(n + 1)
        c[-1] = 1.0
        A_ub = np.vstack([np.hstack([A.T, -np.ones((p, 1))]), np.hstack([-A.T, -np.ones((p, 1))])])
        bounds = [(0, None)] * n + [(0, None)]
    else:
        c = np.concatenate([np.zeros(n), np.ones(p)])
        A_ub = np.vstack([np.hstack([A.T, -np.eye(p)]), np.hstack([-A.T, -np.eye(p)])])
        bounds = [(0, None)] * (n + p)
    A_eq = np.concatenate([np.ones(n), np.zeros(c.size - n)])[None, :]
    res_d = linprog(c, A_ub=A_ub, b_ub=np.zeros(2 * p), A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                    method="highs", options=_HIGHS)
    lam = np.clip(res_d.x[:n], 0.0, None)
    lam = lam / lam.sum()
    value = dual_norm(norm, A.T @ lam)
    rho = float(np.min(A @ beta))
    if rho <= 0:
        beta = np.zeros(p)
        rho = 0.0
    ok = bool(res.status == 0 and res_d.status == 0)
    return DegSEPResult(value, lam, beta, rho, max(0.0, value - rho), ok, "lp")


def _degsep_mirror(A: np.ndarray, norm: Norm, tol: float, max_iter: int) -> DegSEPResult:
    """Entropic mirror descent on the simplex with primal certificates."""
    n, p = A.shape
    lam = np.full(n, 1.0 / n)
    G = float(np.max(rowwise_norm(norm.dual, A))) or 1.0
    base = np.sqrt(2.0 * np.log(max(n, 2))) / G
    best_val, best_lam = np.inf, lam.copy()
    best_rho, best_beta = 0.0, np.zeros(p)
    avg = np.zeros(p)
    wsum = 0.0
    converged = False
    for t in range(1, max_iter + 1):
        z = A.T @ lam
        val = dual_norm(norm, z)
        if val < best_val:
            best_val, best_lam = val, lam.copy()
        if val == 0.0:
            converged = True
            break
        u = unit_maximizer(norm, z)
        eta = base / np.sqrt(t)
        avg += eta * u
        wsum += eta
        for cand in (u, avg / wsum):
            r = float(np.min(A @ cand))
            if r > best_rho:
                best_rho, best_beta = r, cand.copy()
        if best_val - best_rho <= tol:
            converged = True
            break
        g = A @ u
        logits = np.log(lam + 1e-300) - eta * (g - g.min())
        logits -= logits.max()
        lam = np.exp(logits)
        lam /= lam.sum()
    return DegSEPResult(float(best_val), best_lam, best_beta, best_rho,
                        max(0.0, float(best_val) - best_rho), converged, "mirror")


def degsep(data, norm=Norm.L2, tol: float = 1e-10, method: str = "auto",
           max_iter: int = 200000) -> DegSEPResult:
    """DegSEP* with a duality-gap certificate.

    ``method``: "wolfe" (l2 only), "lp" or "mirror" (l1/linf); "auto"
    picks Wolfe for l2 and linear programming otherwise."""
    dataset = data.dataset if isinstance(data, DiscreteDistribution) else data
    norm = Norm.parse(norm)
    A = np.asarray(dataset.signed_rows)
    if method == "auto":
        method = "wolfe" if norm is Norm.L2 else "lp"
    if method == "wolfe":
        if norm is not Norm.L2:
            raise MethodUnavailable("Wolfe's algorithm certifies the l2 case only")
        return _degsep_wolfe(A)
    if method == "lp":
        if norm is Norm.L2:
            return _degsep_wolfe(A)
        return _degsep_lp(A, norm)
    if method == "mirror":
        return _degsep_mirror(A, norm, tol, max_iter)
    raise MethodUnavailable(f"unknown degsep method {method!r}")


# ==================================================================== degnsep

@dataclass(frozen=True)
class DegNSEPResult:
    value: float
    witness: np.ndarray
    method: DegNSEPMethod
    lower_bound: float

    @property
    def certified(self) -> bool:
        return self.method.certified

    def to_dict(self) -> dict:
        return {"value": self.value, "lower_bound": self.lower_bound, "method": self.method.value,
                "certified": self.certified, "witness": self.witness.tolist()}


def _misclass(A: np.ndarray, c: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Weighted negative-part error for each row of B."""
    return c @ np.maximum(-(A @ B.T), 0.0)


def _unit_circle_points(theta: np.ndarray, norm: Norm) -> np.ndarray:
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    return U / rowwise_norm(norm, U)[:, None]


def _degnsep_grid(A, c, norm, tol=GRID_TOL, n0=1024, max_rounds=200):
    """Angular branch and bound on the unit circle of ``norm`` (p = 2)."""
    two_pi = 2.0 * np.pi
    lip = float(c @ rowwise_norm(norm.dual, A))
    nodes = [np.arange(n0) * (two_pi / n0)]
    nz = np.any(A != 0, axis=1)
    if np.any(nz):
        phi = np.arctan2(A[nz, 1], A[nz, 0])
        nodes += [phi + np.pi / 2, phi - np.pi / 2]  # breakpoints of each hinge term
    if norm is Norm.L1:
        nodes.append(np.arange(4) * (np.pi / 2))
    elif norm is Norm.LINF:
        nodes.append(np.pi / 4 + np.arange(4) * (np.pi / 2))
    theta = np.unique(np.mod(np.concatenate(nodes), two_pi))
    pts = _unit_circle_points(theta, norm)
    vals = _misclass(A, c, pts)
    lower = 0.0
    for _ in range(max_rounds):
        nxt_theta = np.append(theta[1:], theta[0] + two_pi)
        nxt_pts = np.roll(pts, -1, axis=0)
        nxt_vals = np.roll(vals, -1)
        if norm is Norm.L2:
            length = nxt_theta - theta
        else:
            # every cell is a straight segment since polygon vertices are nodes
            length = rowwise_norm(norm, nxt_pts - pts)
        cell_lo = np.maximum(0.0, 0.5 * (vals + nxt_vals - lip * length))
        upper = float(np.min(vals))
        lower = float(np.min(cell_lo))
        if upper - lower <= tol:
            break
        split = cell_lo < upper - tol
        mids = 0.5 * (theta[split] + nxt_theta[split])
        mids = np.mod(mids, two_pi)
        theta = np.concatenate([theta, mids])
        order = np.argsort(theta, kind="stable")
        theta = theta[order]
        pts = np.concatenate([pts, _unit_circle_points(mids, norm)])[order]
        vals = np.concatenate([vals, _misclass(A, c, _unit_circle_points(mids, norm))])[order]
    k = int(np.argmin(vals))
    return float(vals[k]), pts[k], min(lower, float(vals[k]))


def _lp_facet_l1(A, c, signs):
    n, p = A.shape
    AS = A * signs[None, :]
    # variables (gamma in simplex, t >= 0): min c't  s.t.  -AS gamma - t <= 0
    cost = np.concatenate([np.zeros(p), c])
    A_ub = np.hstack([-AS, -np.eye(n)])
    A_eq = np.concatenate([np.ones(p), np.zeros(n)])[None, :]
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (p + n), method="highs", options=_HIGHS)
    gamma = np.clip(res.x[:p], 0.0, None)
    gamma /= gamma.sum()
    return float(res.fun), signs * gamma


def _lp_facet_linf(A, c, j, s):
    n, p = A.shape
    cost = np.concatenate([np.zeros(p), c])
    A_ub = np.hstack([-A, -np.eye(n)])
    bounds = [(-1.0, 1.0)] * p + [(0, None)] * n
    bounds[j] = (s, s)
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(n), bounds=bounds, method="highs", options=_HIGHS)
    beta = np.clip(res.x[:p], -1.0, 1.0)
    beta[j] = s
    return float(res.fun), beta


def _facets(A, c, norm):
    """Exact minimum over the l1 or l-infinity sphere by facet-wise LPs."""
    n, p = A.shape
    if norm is Norm.L1:
        jobs = [np.array(s) for s in itertools.product((1.0, -1.0), repeat=p)]
        results = [_lp_facet_l1(A, c, s) for s in jobs]
    else:
        results = [_lp_facet_linf(A, c, j, s) for j in range(p) for s in (1.0, -1.0)]
    lp_min = min(r[0] for r in results)
    vals = [float(_misclass(A, c, b[None, :])[0]) for _, b in results]
    k = int(np.argmin(vals))
    return vals[k], results[k][1], max(0.0, lp_min - _LP_SLACK)


def _normalize(beta: np.ndarray, norm: Norm) -> np.ndarray:
    return beta / primal_norm(norm, beta)


def _subgradient_start(A, c, norm, beta, iters, step0):
    best_val = float(_misclass(A, c, beta[None, :])[0])
    best = beta
    for t in range(1, iters + 1):
        neg = (A @ beta) < 0
        g = -(c[neg] @ A[neg])
        if not np.any(g):
            break
        beta = beta - (step0 / np.sqrt(t)) * g / np.linalg.norm(g)
        nb = primal_norm(norm, beta)
        if nb == 0:
            break
        beta = beta / nb
        v = float(_misclass(A, c, beta[None, :])[0])
        if v < best_val:
            best_val, best = v, beta
    return best_val, best


def _degnsep_heuristic(A, c, norm, seed, starts, iters, workers):
    from .runtime import parallel_map

    n, p = A.shape
    inf_val, inf_beta, inf_lower = _facets(A, c, Norm.LINF)
    # certified lower bound by norm equivalence: ||b||_inf >= ||b|| / k_norm
    k_norm = {Norm.L1: float(p), Norm.L2: float(np.sqrt(p)), Norm.LINF: 1.0}[norm]
    lower = inf_lower / k_norm
    init = [_normalize(inf_beta, norm)]
    for s in range(starts):
        b = substream(seed, s).standard_normal(p)
        init.append(_normalize(b, norm))

    def run(b0):
        return _subgradient_start(A, c, norm, b0, iters, 0.5)

    out = parallel_map(run, init, workers)
    vals = [v for v, _ in out]
    k = int(np.argmin(vals))  # lowest start index wins ties
    witness = _normalize(out[k][1], norm)
    value = float(_misclass(A, c, witness[None, :])[0])
    return value, witness, min(lower, value)


def degnsep(data, norm=Norm.L2, method: str | DegNSEPMethod = "auto", tol: float = GRID_TOL,
            seed: int = 0, starts: int = 64, iters: int = 400, workers: int | None = 1) -> DegNSEPResult:
    """DegNSEP* (weighted for a DiscreteDistribution) with witness and lower bound.

    ``method="auto"``: exact for p = 1, CertifiedGrid for p = 2, FacetExact
    for l1 with p <= 12 and for l-infinity, Heuristic otherwise."""
    dist = _as_distribution(data)
    norm = Norm.parse(norm)
    A = np.asarray(dist.dataset.signed_rows)
    c = dist.weights
    n, p = A.shape
    if method == "auto":
        if p == 1:
            method = DegNSEPMethod.FACET_EXACT
        elif p == 2:
            method = DegNSEPMethod.CERTIFIED_GRID
        elif norm is Norm.LINF or (norm is Norm.L1 and p <= FACET_L1_MAX_P):
            method = DegNSEPMethod.FACET_EXACT
        else:
            method = DegNSEPMethod.HEURISTIC
    method = DegNSEPMethod(method)
    if method is DegNSEPMethod.CERTIFIED_GRID:
        if p != 2:
            raise MethodUnavailable(f"CertifiedGrid needs p = 2 (got p = {p}, norm {norm.value})")
        value, witness, lower = _degnsep_grid(A, c, norm, tol)
    elif method is DegNSEPMethod.FACET_EXACT:
        if p == 1:
            vals = [float(_misclass(A, c, np.array([[s]]))[0]) for s in (1.0, -1.0)]
            k = int(np.argmin(vals))
            value, witness, lower = vals[k], np.array([1.0 if k == 0 else -1.0]), vals[k]
        elif norm is Norm.LINF or (norm is Norm.L1 and p <= FACET_L1_MAX_P):
            value, witness, lower = _facets(A, c, norm)
        else:
            raise MethodUnavailable(f"FacetExact unavailable for p = {p}, norm {norm.value}")
    else:
        value, witness, lower = _degnsep_heuristic(A, c, norm, seed, starts, iters, workers)
    witness = _normalize(np.asarray(witness, dtype=float), norm)
    value = float(_misclass(A, c, witness[None, :])[0])
    return DegNSEPResult(value, witness, method, float(min(lower, value)))


# ==================================================================== nu*

@dataclass(frozen=True)
class NuStar:
    value: float
    certified: bool
    witness: np.ndarray | None = None


_POLYGON = {
    Norm.L1: np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]),
    Norm.LINF: np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]),
}


def nu_star(M, norm=Norm.L2, seed: int = 0, starts: int = 64, require_certified: bool = False) -> NuStar:
    """min_{||b|| = 1} b'Mb for symmetric PSD M."""
    M = np.asarray(M, dtype=float)
    norm = Norm.parse(norm)
    p = M.shape[0]
    if norm is Norm.L2:
        return NuStar(lambda_min_sym(M), True)
    if p == 1:
        return NuStar(float(M[0, 0]), True, np.array([1.0]))
    if p == 2:
        # the quadratic is minimized exactly on each edge of the polygon
        V = _POLYGON[norm]
        best, arg = np.inf, None
        for k in range(4):
            a, b = V[k], V[(k + 1) % 4]
            d = b - a
            qa, qd = float(a @ M @ a), float(d @ M @ d)
            ad = float(a @ M @ d)
            ts = [0.0, 1.0]
            if qd > 0:
                ts.append(min(1.0, max(0.0, -ad / qd)))
            for t in ts:
                v = qa + 2 * t * ad + t * t * qd
                if v < best:
                    best, arg = v, a + t * d
        return NuStar(float(best), True, arg)
    if require_certified:
        raise MethodUnavailable(f"certified nu* unavailable for norm {norm.value} with p = {p}")
    best, arg = np.inf, None
    for s in range(starts):
        b = _normalize(substream(seed, s).standard_normal(p), norm)
        for t in range(1, 301):
            g = 2 * M @ b
            if not np.any(g):
                break
            b = _normalize(b - (0.5 / np.sqrt(t)) * g / np.linalg.norm(g), norm)
            v = float(b @ M @ b)
            if v < best:
                best, arg = v, b.copy()
    return NuStar(float(best), False, arg)


# ==================================================================== status and report

def classify(degsep_value: float, degnsep_result: DegNSEPResult, tol_ill: float = DEFAULT_TOL_ILL) -> Status:
    if degsep_value > tol_ill:
        return Status.SEPARABLE
    if degnsep_result.certified and degnsep_result.lower_bound > tol_ill:
        return Status.NON_SEPARABLE
    return Status.ILL_POSED


def separability_status(data, norm=Norm.L2, tol_ill: float = DEFAULT_TOL_ILL, method="auto") -> Status:
    ds = degsep(data, norm)
    if ds.value > tol_ill:
        return Status.SEPARABLE
    return classify(ds.value, degnsep(data, norm, method=method), tol_ill)


@dataclass(frozen=True)
class ConditioningReport:
    norm: Norm
    n: int
    p: int
    degsep: DegSEPResult
    degnsep: DegNSEPResult
    status: Status
    tol_ill: float
    operator_norms: OperatorNorms
    smoothness_L: float
    notes: tuple = field(default_factory=tuple)

    @property
    def dist0_bound(self) -> float:
        return 2 * LN2 / self.degnsep.value if self.degnsep.value > 0 else float("inf")

    @property
    def beta_star_norm_bound(self) -> float:
        return LN2 / self.degnsep.value if self.degnsep.value > 0 else float("inf")

    def to_dict(self) -> dict:
        return {
            "norm": self.norm.value, "n": self.n, "p": self.p,
            "status": self.status.value, "tol_ill": self.tol_ill,
            "degsep": self.degsep.to_dict(), "degnsep": self.degnsep.to_dict(),
            "dist0_bound": self.dist0_bound, "beta_star_norm_bound": self.beta_star_norm_bound,
            "operator_norms": self.operator_norms.to_dict(), "smoothness_L": self.smoothness_L,
            "notes": list(self.notes),
        }


def analyze(data, norm=Norm.L2, tol_ill: float = DEFAULT_TOL_ILL, method="auto", seed: int = 0) -> ConditioningReport:
    """Both condition numbers, the status and the operator-norm constants."""
    dist = _as_distribution(data)
    dataset = dist.dataset
    norm = Norm.parse(norm)
    ds = degsep(dataset, norm)
    dn = degnsep(dist, norm, method=method, seed=seed)
    status = classify(ds.value, dn, tol_ill)
    ops = operator_norms(norm, dataset.X)
    notes = []
    if status is Status.ILL_POSED:
        notes.append(f"both condition numbers at or below tolerance {tol_ill:g}"
                     if dn.certified else "degnsep is an uncertified upper bound; status undecided")
    if not ops.x_dot_2_certified:
        notes.append("x_dot_2 is an over-estimate")
    L = ops.x_dot_2 ** 2 / (4.0 * dataset.n)
    return ConditioningReport(norm, dataset.n, dataset.p, ds, dn, status, tol_ill, ops, L, tuple(notes))


# ==================================================================== perturbations

@dataclass(frozen=True)
class Perturbation:
    delta_X: np.ndarray
    measured_norm: float
    norm_kind: str          # "ScaledDot1" or "DotInf"
    perturbed: Dataset
    norm: Norm
    epsilon: float = 0.0

    def to_dict(self) -> dict:
        return {"norm_kind": self.norm_kind, "norm": self.norm.value, "measured_norm": self.measured_norm,
                "epsilon": self.epsilon, "delta_X": self.delta_X.tolist()}


def perturb_to_separable(dataset: Dataset, norm=Norm.L2, eps: float = 1e-3,
                         tol_ill: float = DEFAULT_TOL_ILL, degnsep_result: DegNSEPResult | None = None) -> Perturbation:
    """Rank-one perturbation of scaled size degnsep + eps that separates the data."""
    norm = Norm.parse(norm)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if degsep(dataset, norm).value > tol_ill:
        raise NotApplicable("data is already separable")
    dn = degnsep_result or degnsep(dataset, norm)
    beta = dn.witness
    s_bar = unit_maximizer(norm.dual, beta)  # ||s||_* = 1 and s.beta = ||beta|| = 1
    t = dataset.signed_rows @ beta
    y = dataset.y.astype(float)
    u = y * np.maximum(-t, 0.0) + y * eps
    delta = np.outer(u, s_bar)
    # ||u s'||_{.,1} = ||u||_1 ||s||_*
    measured = float(np.sum(np.abs(u)) * dual_norm(norm, s_bar) / dataset.n)
    return Perturbation(delta, measured, "ScaledDot1", Dataset(dataset.X + delta, dataset.y), norm, eps)


def perturb_to_nonseparable(dataset: Dataset, norm=Norm.L2, tol_ill: float = DEFAULT_TOL_ILL,
                            degsep_result: DegSEPResult | None = None) -> Perturbation:
    """Perturbation -y (X'Y lam)' of size degsep that kills separability."""
    norm = Norm.parse(norm)
    ds = degsep_result or degsep(dataset, norm)
    if ds.value <= tol_ill:
        raise NotApplicable("data is not separable")
    z = dataset.signed_rows.T @ ds.lam
    y = dataset.y.astype(float)
    delta = -np.outer(y, z)
    measured = float(np.max(rowwise_norm(norm.dual, delta)))
    return Perturbation(delta, measured, "DotInf", Dataset(dataset.X + delta, dataset.y), norm)
