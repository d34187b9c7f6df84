"""Condition numbers, first-order solvers and guarantee checks for logistic regression."""

__version__ = "0.1.0"

from .norms import Norm, dual_norm, operator_norms, primal_norm, unit_maximizer  # noqa: E402
from .data import Dataset, DiscreteDistribution, generate_logistic, generate_planted_margin, load_csv  # noqa: E402
from .loss import LossContext, gradient, hessian, loss_value, make_context  # noqa: E402
from .conditioning import (Status, analyze, degnsep, degsep, nu_star, perturb_to_nonseparable,  # noqa: E402
                           perturb_to_separable)
from .solvers import StepRule, reference_optimum, sgd, sgd_trials, steepest_descent  # noqa: E402
from .guarantees import build_inputs  # noqa: E402

__all__ = ["Norm", "dual_norm", "operator_norms", "primal_norm", "unit_maximizer", "Dataset", "DiscreteDistribution",
           "generate_logistic", "generate_planted_margin", "load_csv", "LossContext", "gradient", "hessian",
           "loss_value", "make_context", "Status", "analyze", "degnsep", "degsep", "nu_star",
           "perturb_to_nonseparable", "perturb_to_separable", "StepRule", "reference_optimum", "sgd", "sgd_trials",
           "steepest_descent", "build_inputs"]
