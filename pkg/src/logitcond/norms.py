"""Primal/dual norms, steepest-descent directions and operator norms.

Only the three norms L1, L2 and LInf are supported.  Operator norms are
of the form ``||A||_{.,q} = max_{||b|| <= 1} ||A b||_q`` where the inner
norm is the chosen primal norm.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotSymmetric, ZeroGradient

POWER_RTOL = 1e-10
_POWER_MAX_ITER = 20000
_VERTEX_ENUM_MAX_P = 16


class Norm(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value) -> "Norm":
        if isinstance(value, Norm):
            return value
        key = str(value).strip().lower().replace("_", "")
        aliases = {"l1": cls.L1, "1": cls.L1, "l2": cls.L2, "2": cls.L2,
                   "linf": cls.LINF, "inf": cls.LINF, "l∞": cls.LINF}
        if key not in aliases:
            raise ValueError(f"unknown norm {value!r}")
        return aliases[key]

    @property
    def dual(self) -> "Norm":
        return {Norm.L1: Norm.LINF, Norm.L2: Norm.L2, Norm.LINF: Norm.L1}[self]


def _check_finite(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NonFinite("array contains NaN or Inf")
    return a


def _l2(v: np.ndarray) -> float:
    s = float(v @ v) if v.ndim == 1 else math.nan
    if 1e-290 < s < 1e290:
        return math.sqrt(s)
    m = float(np.max(np.abs(v))) if v.size else 0.0
    if m == 0.0:
        return 0.0
    if 1e-150 < m < 1e150:
        return float(np.linalg.norm(v))
    # rescale so squaring neither underflows nor overflows
    return m * float(np.linalg.norm(v / m))


def primal_norm(norm: Norm, v) -> float:
    v = np.asarray(v, dtype=float)
    norm = Norm.parse(norm)
    if norm is Norm.L1:
        return float(np.sum(np.abs(v)))
    if norm is Norm.L2:
        return _l2(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def dual_norm(norm: Norm, v) -> float:
    """Norm of ``v`` in the dual of ``norm``."""
    return primal_norm(Norm.parse(norm).dual, v)


def rowwise_norm(norm: Norm, A) -> np.ndarray:
    """Primal norm of every row of a 2-D array."""
    A = np.asarray(A, dtype=float)
    norm = Norm.parse(norm)
    if norm is Norm.L1:
        return np.sum(np.abs(A), axis=1)
    if norm is Norm.L2:
        return np.sqrt(np.sum(A * A, axis=1))
    return np.max(np.abs(A), axis=1)


def unit_maximizer(norm: Norm, g) -> np.ndarray:
    """Unit-norm d maximizing g.d; the steepest-descent direction oracle.

    Ties are broken deterministically: L1 picks the lowest index among the
    coordinates of largest magnitude, LInf maps sign(0) to +1.
    """
    g = np.asarray(g, dtype=float)
    norm = Norm.parse(norm)
    if not np.any(g):
        raise ZeroGradient("unit_maximizer needs a nonzero vector")
    if norm is Norm.L2:
        m = np.max(np.abs(g))
        h = g / m
        return h / np.linalg.norm(h)
    if norm is Norm.L1:
        j = int(np.argmax(np.abs(g)))
        d = np.zeros_like(g)
        d[j] = 1.0 if g[j] > 0 else -1.0
        return d
    return np.where(g >= 0, 1.0, -1.0)


# ---------------------------------------------------------------- spectra

def _power_iteration(apply, p: int, rtol: float = POWER_RTOL, max_iter: int = _POWER_MAX_ITER):
    """Largest eigenvalue of a PSD operator. Returns (value, converged)."""
    v = np.ones(p) / np.sqrt(p)
    restarts = 0
    lam = 0.0
    for _ in range(max_iter):
        w = apply(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            if restarts > 3:
                return 0.0, True
            # stagnation: the start vector lies in the null space
            restarts += 1
            v = np.random.default_rng(restarts).standard_normal(p)
            v /= np.linalg.norm(v)
            continue
        v_new = w / nw
        lam_new = float(v_new @ apply(v_new))
        # converge well past the contract tolerance so Rayleigh-quotient
        # underestimation stays far below it
        if abs(lam_new - lam) <= 1e-3 * rtol * max(abs(lam_new), 1e-300):
            return lam_new, True
        lam, v = lam_new, v_new
    return lam, False


def spectral_norm(X) -> tuple[float, bool]:
    """Largest singular value by power iteration on X^T X.

    Falls back to a dense symmetric eigensolver when the iteration does
    not settle (clustered top singular values)."""
    X = _check_finite(X)
    n, p = X.shape
    if p <= n:
        G = X.T @ X
        apply = lambda v: G @ v  # noqa: E731
    else:
        apply = lambda v: X.T @ (X @ v)  # noqa: E731
    lam, ok = _power_iteration(apply, p)
    if not ok:
        lam = float(np.linalg.eigvalsh(X.T @ X)[-1])
    return float(np.sqrt(max(lam, 0.0))), True


def _check_symmetric(M) -> np.ndarray:
    M = _check_finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    return 0.5 * (M + M.T)


def lambda_min_sym(M) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Closed form for p <= 2; otherwise shifted inverse iteration polished by
    Rayleigh-quotient steps."""
    M = _check_symmetric(M)
    p = M.shape[0]
    if p == 1:
        return float(M[0, 0])
    if p == 2:
        a, b, c = M[0, 0], M[0, 1], M[1, 1]
        half_tr = 0.5 * (a + c)
        rad = float(np.hypot(0.5 * (a - c), b))
        lam_max = half_tr + rad
        if half_tr > 0 and lam_max > 0:
            return float((a * c - b * b) / lam_max)
        return float(half_tr - rad)
    # Gershgorin lower bound makes M - shift*I positive semidefinite
    off = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    shift = float(np.min(np.diag(M) - off))
    scale = max(float(np.max(np.abs(M))), 1e-300)
    shift -= 1e-8 * scale
    B = M - shift * np.eye(p)
    try:
        chol = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        return float(np.linalg.eigvalsh(M)[0])
    v = np.ones(p) / np.sqrt(p)
    lam = np.inf
    converged = False
    for _ in range(_POWER_MAX_ITER):
        w = np.linalg.solve(chol.T, np.linalg.solve(chol, v))
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            break
        v = w / nw
        lam_new = float(v @ M @ v)
        if abs(lam_new - lam) <= 1e-14 * scale:
            lam = lam_new
            converged = True
            break
        lam = lam_new
    if not converged:
        return float(np.linalg.eigvalsh(M)[0])
    # a few Rayleigh-quotient steps sharpen the estimate
    for _ in range(3):
        try:
            w = np.linalg.solve(M - lam * np.eye(p), v)
        except np.linalg.LinAlgError:
            break
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            break
        v_new = w / nw
        lam_new = float(v_new @ M @ v_new)
        if lam_new > lam + 1e-12 * scale:
            break
        v, lam = v_new, lam_new
    return float(lam)


def lambda_max_sym(M) -> float:
    M = _check_symmetric(M)
    if M.shape[0] == 1:
        return float(M[0, 0])
    return -lambda_min_sym(-M)


# ---------------------------------------------------------------- operator norms

@dataclass(frozen=True)
class OperatorValue:
    value: float
    certified: bool


@dataclass(frozen=True)
class OperatorNorms:
    """The three operator norms that enter the constants."""

    x_dot_2: float
    x_2_inf: float
    x_dot_inf: float
    x_dot_2_certified: bool = True
    x_2_inf_certified: bool = True
    x_dot_inf_certified: bool = True

    @property
    def certified(self) -> bool:
        return self.x_dot_2_certified and self.x_2_inf_certified and self.x_dot_inf_certified

    def to_dict(self) -> dict:
        return {"x_dot_2": self.x_dot_2, "x_dot_2_certified": self.x_dot_2_certified,
                "x_2_inf": self.x_2_inf, "x_dot_inf": self.x_dot_inf}


def _linf_to_l2_exact(X: np.ndarray) -> float:
    # convex in b, so the max over the cube sits at a vertex; +/- symmetry halves the work
    p = X.shape[1]
    best = 0.0
    col0 = X[:, 0]
    rest = X[:, 1:]
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=p - 1))) if p > 1 else np.zeros((1, 0))
    for start in range(0, signs.shape[0], 4096):
        S = signs[start:start + 4096]
        Z = col0[:, None] + rest @ S.T
        best = max(best, float(np.max(np.sum(Z * Z, axis=0))))
    return float(np.sqrt(best))


def operator_norm_x_dot_2(norm: Norm, X, exact_linf_max_p: int = _VERTEX_ENUM_MAX_P) -> OperatorValue:
    """``max_{||b|| <= 1} ||X b||_2`` for the chosen primal norm.

    LInf is exact by vertex enumeration when p <= ``exact_linf_max_p``,
    otherwise the flagged over-estimate sqrt(p) * sigma_max."""
    X = _check_finite(X)
    norm = Norm.parse(norm)
    if X.size == 0:
        raise ValueError("empty matrix")
    if norm is Norm.L2:
        val, ok = spectral_norm(X)
        return OperatorValue(val, ok)
    if norm is Norm.L1:
        return OperatorValue(float(np.max(np.sqrt(np.sum(X * X, axis=0)))), True)
    p = X.shape[1]
    if p <= exact_linf_max_p:
        return OperatorValue(_linf_to_l2_exact(X), True)
    sigma, _ = spectral_norm(X)
    return OperatorValue(float(np.sqrt(p) * sigma), False)


def max_row_dual_norm(norm: Norm, X) -> float:
    """``||X||_{.,inf} = max_i ||x_i||_*``."""
    X = _check_finite(X)
    return float(np.max(rowwise_norm(Norm.parse(norm).dual, X)))


def operator_norms(norm: Norm, X) -> OperatorNorms:
    norm = Norm.parse(norm)
    x2 = operator_norm_x_dot_2(norm, X)
    return OperatorNorms(
        x_dot_2=x2.value,
        x_2_inf=max_row_dual_norm(Norm.L2, X),
        x_dot_inf=max_row_dual_norm(norm, X),
        x_dot_2_certified=x2.certified,
    )
