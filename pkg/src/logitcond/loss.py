"""Logistic loss: values, derivatives, dual weights and the prox representation.

All terms are evaluated through stable softplus/sigmoid forms, so margins of
several hundred in either direction neither overflow nor lose the sign of
the gradient.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit, xlog1py, xlogy

from .data import Dataset, DiscreteDistribution
from .norms import Norm, operator_norm_x_dot_2

LN2 = float(np.log(2.0))
REPORT_CLAMP = 1e-300


def softplus_neg(t):
    """ell(t) = ln(1 + exp(-t)) = max(-t, 0) + ln(1 + exp(-|t|))."""
    t = np.asarray(t, dtype=float)
    return np.maximum(-t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def dual_weight_values(t):
    """w = 1/(1 + exp(t)), i.e. -ell'(t)."""
    return expit(-np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class LossContext:
    """Data (as a finitely supported distribution) plus the working norm."""

    distribution: DiscreteDistribution
    norm: Norm
    x_dot_2: float
    x_dot_2_certified: bool

    @property
    def dataset(self) -> Dataset:
        return self.distribution.dataset

    @property
    def weights(self) -> np.ndarray:
        return self.distribution.weights

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @cached_property
    def smoothness_L(self) -> float:
        """||X||^2_{.,2} / (4n) for uniform weights, lambda_max(Sigma)/4 in l2 otherwise."""
        if self.distribution.is_uniform:
            return self.x_dot_2 ** 2 / (4.0 * self.n)
        return self.x_dot_2 ** 2 / 4.0


def make_context(data: Dataset | DiscreteDistribution, norm=Norm.L2) -> LossContext:
    dist = data if isinstance(data, DiscreteDistribution) else DiscreteDistribution.uniform(data)
    norm = Norm.parse(norm)
    X = dist.dataset.X
    if dist.is_uniform:
        op = operator_norm_x_dot_2(norm, X)
    else:
        # ||W^{1/2} X||_{.,2}^2 = max_{||b||<=1} b' Sigma b
        op = operator_norm_x_dot_2(norm, np.sqrt(dist.weights)[:, None] * X)
    return LossContext(dist, norm, op.value, op.certified)


def margins(ctx: LossContext, beta) -> np.ndarray:
    """Classification values t_i = y_i beta.x_i."""
    return ctx.dataset.signed_rows @ np.asarray(beta, dtype=float)


def _wmean(ctx: LossContext, v: np.ndarray) -> float:
    if ctx.distribution.is_uniform:
        return float(np.mean(v))
    return float(ctx.weights @ v)


def loss_value(ctx: LossContext, beta) -> float:
    return _wmean(ctx, softplus_neg(margins(ctx, beta)))


def gradient(ctx: LossContext, beta) -> np.ndarray:
    t = margins(ctx, beta)
    w = dual_weight_values(t)
    A = ctx.dataset.signed_rows
    if ctx.distribution.is_uniform:
        return -(A.T @ w) / ctx.n
    return -(A.T @ (ctx.weights * w))


def loss_and_gradient(ctx: LossContext, beta) -> tuple[float, np.ndarray, np.ndarray]:
    """(loss, gradient, margins) in one pass."""
    t = margins(ctx, beta)
    A = ctx.dataset.signed_rows
    w = dual_weight_values(t)
    if ctx.distribution.is_uniform:
        return float(np.mean(softplus_neg(t))), -(A.T @ w) / ctx.n, t
    return float(ctx.weights @ softplus_neg(t)), -(A.T @ (ctx.weights * w)), t


@dataclass(frozen=True)
class DualWeights:
    w: np.ndarray

    def reported(self) -> np.ndarray:
        """Weights clamped into (eps, 1 - eps) for display and logs only."""
        return np.clip(self.w, REPORT_CLAMP, 1.0 - 1e-16)

    def normalized(self) -> np.ndarray:
        return self.w / np.sum(self.w)


def dual_weights(ctx: LossContext, beta) -> DualWeights:
    return DualWeights(dual_weight_values(margins(ctx, beta)))


def curvature_weights(t) -> np.ndarray:
    """ell''(t) = e^t/(1+e^t)^2, computed as sigma(t) sigma(-t)."""
    t = np.asarray(t, dtype=float)
    return expit(t) * expit(-t)


def hessian(ctx: LossContext, beta) -> np.ndarray:
    if ctx.p > 512:
        raise ValueError("dense Hessian limited to p <= 512; use hessian_vector_product")
    t = margins(ctx, beta)
    g = curvature_weights(t)
    g = g / ctx.n if ctx.distribution.is_uniform else g * ctx.weights
    X = ctx.dataset.X
    H = (X * g[:, None]).T @ X
    return 0.5 * (H + H.T)


def hessian_vector_product(ctx: LossContext, beta, v) -> np.ndarray:
    t = margins(ctx, beta)
    g = curvature_weights(t)
    g = g / ctx.n if ctx.distribution.is_uniform else g * ctx.weights
    X = ctx.dataset.X
    return X.T @ (g * (X @ np.asarray(v, dtype=float)))


def misclassification(ctx: LossContext, beta) -> float:
    """Average negative part of the classification values."""
    return _wmean(ctx, np.maximum(-margins(ctx, beta), 0.0))


# ---------------------------------------------------------------- prox / Fenchel

def prox_d(w, weights=None, w_complement=None) -> float:
    """d(w) = sum_i c_i [w_i ln w_i + (1 - w_i) ln(1 - w_i)], c_i = 1/n by default.

    ``w_complement`` may carry 1 - w computed separately for accuracy."""
    w = np.asarray(w, dtype=float)
    c = np.full(w.shape, 1.0 / w.size) if weights is None else np.asarray(weights, dtype=float)
    if w_complement is None:
        terms = xlogy(w, w) + xlog1py(1.0 - w, -w)
    else:
        terms = xlogy(w, w) + xlogy(w_complement, w_complement)
    return float(c @ terms)


def prox_d_grad(w, weights=None) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    c = np.full(w.shape, 1.0 / w.size) if weights is None else np.asarray(weights, dtype=float)
    return c * (np.log(w) - np.log1p(-w))


def fenchel_rhs(ctx: LossContext, beta) -> float:
    """-w*'(1/n)YX beta - d(w*) evaluated at the maximizing weights."""
    t = margins(ctx, beta)
    w = expit(-t)
    wc = expit(t)
    c = np.full(ctx.n, 1.0 / ctx.n) if ctx.distribution.is_uniform else ctx.weights
    # w ln w and (1-w) ln(1-w) with the logs taken from softplus forms
    ln_w = -softplus_neg(-t)
    ln_wc = -softplus_neg(t)
    d = float(c @ (w * ln_w + wc * ln_wc))
    return float(-(c @ (w * t)) - d)


def fenchel_gap(ctx: LossContext, beta) -> float:
    return abs(loss_value(ctx, beta) - fenchel_rhs(ctx, beta))


# ---------------------------------------------------------------- accurate differences

def loss_gap_terms(t, t_ref, delta=None) -> np.ndarray:
    """ell(t_i) - ell(t_ref_i), accurate when t is close to t_ref.

    ``delta`` may carry t_ref - t computed directly (e.g. as A(beta_ref - beta)),
    which avoids the rounding of subtracting two margins."""
    t = np.asarray(t, dtype=float)
    t_ref = np.asarray(t_ref, dtype=float)
    delta = t_ref - t if delta is None else np.asarray(delta, dtype=float)
    close = np.abs(delta) <= 30.0
    safe = np.where(close, delta, 0.0)
    near = np.log1p(expit(-t_ref) * np.expm1(safe))
    return np.where(close, near, softplus_neg(t) - softplus_neg(t_ref))


def loss_gap(ctx: LossContext, beta, beta_ref) -> float:
    """L(beta) - L(beta_ref) without the cancellation of subtracting two losses."""
    beta = np.asarray(beta, dtype=float)
    beta_ref = np.asarray(beta_ref, dtype=float)
    A = ctx.dataset.signed_rows
    d = loss_gap_terms(A @ beta, A @ beta_ref, A @ (beta_ref - beta))
    return _wmean(ctx, d)


def stochastic_gradient(x, y: int, beta) -> np.ndarray:
    """Gradient of ell(y beta.x) for a single observation."""
    x = np.asarray(x, dtype=float)
    t = y * float(x @ beta)
    return -expit(-t) * y * x
