"""Command-line front end: analyze, generate, solve, verify, perturb.

Exit status: 0 success (for ``verify``: no check failed), 1 a check failed,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .conditioning import Status, analyze, perturb_to_nonseparable, perturb_to_separable
from .data import (contradictory_pair, dataset_to_csv_text, generate_logistic, generate_planted_margin,
                   ill_posed_fixture, load_csv, planted_pair)
from .errors import LogitCondError
from .guarantees import (GuaranteeReport, build_inputs, eval_iterate_bound, eval_iterate_bound_sgd,
                         eval_margin_gradient_lemma, eval_prop21, eval_sgd_nonsep, eval_sgd_sep, eval_thm32,
                         eval_thm33, eval_thm34, eval_thm_sd_generic, random_references)
from .loss import make_context
from .norms import Norm
from .serialize import dumps
from .solvers import StepRule, sgd, sgd_trials, steepest_descent

THEOREMS = ("all", "3.1", "3.2", "3.3", "3.4", "4.2", "4.3", "4.4", "4.5", "lemma2.4", "propA.2")
RULES = ("greedy", "nonsep", "sepl2", "const", "rcor")
FIXTURES = {"ill_posed": ill_posed_fixture, "contradictory": contradictory_pair, "planted_pair": planted_pair}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _load(args):
    source = args.data
    if source is None:
        raise UsageError("--data is required")
    if source.startswith("fixture:"):
        name = source.split(":", 1)[1]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
        return FIXTURES[name]()
    if not os.path.isfile(source):
        raise UsageError(f"data file not found: {source}")
    label = args.label_col
    try:
        label = int(label)
    except ValueError:
        pass
    return load_csv(source, label_column=label, zero_one=args.zero_one)


def _header(args, command: str) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {"tool": "logitcond", "version": __version__, "command": command, "config": cfg, "seed": args.seed}


def _comments(args, command: str) -> list[str]:
    h = _header(args, command)
    return [f"logitcond {__version__} {command}", "config: " + json.dumps(h["config"], sort_keys=True)]


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _rule(args, ctx, k: int, default: str) -> StepRule:
    name = args.rule or default
    if args.alpha is not None and name != "const":
        raise UsageError("--alpha applies only to --rule const")
    if args.L is not None and name != "greedy":
        raise UsageError("--L applies only to --rule greedy")
    if args.R is not None and name != "rcor":
        raise UsageError("--R applies only to --rule rcor")
    if name == "greedy":
        return StepRule.greedy(args.L if args.L is not None else ctx.smoothness_L)
    if name == "nonsep":
        return StepRule.nonsep()
    if name == "sepl2":
        return StepRule.sepl2()
    if name == "const":
        if args.alpha is None:
            raise UsageError("--rule const needs --alpha")
        return StepRule.constant(args.alpha)
    R = args.R if args.R is not None else ctx.distribution.radius_R
    return StepRule.rcor(R, k)


def _is_sgd(name) -> bool:
    return name in ("const", "rcor")


# ---------------------------------------------------------------- commands

def cmd_analyze(args) -> int:
    ds = _load(args)
    rep = analyze(ds, args.norm, tol_ill=args.tol_ill, seed=args.seed)
    out = _header(args, "analyze")
    out["report"] = rep.to_dict()
    _write(args.out, dumps(out))
    return 0


def cmd_generate(args) -> int:
    if args.kind == "logistic":
        beta = [float(v) for v in args.beta_true.split(",")] if args.beta_true else [1.0] * args.p
        if len(beta) not in (1, args.p):
            raise UsageError("--beta-true needs 1 or p comma-separated values")
        ds = generate_logistic(args.n, args.p, beta, args.seed)
    elif args.kind == "planted":
        ds = generate_planted_margin(args.n, args.p, args.margin, args.seed, spread=args.spread)
    else:
        ds = FIXTURES[args.kind]()
    _write(args.out, dataset_to_csv_text(ds, header=True, comments=_comments(args, "generate")))
    return 0


def cmd_solve(args) -> int:
    ds = _load(args)
    ctx = make_context(ds, args.norm)
    name = args.rule or "nonsep"
    rule = _rule(args, ctx, args.k, "nonsep")
    if _is_sgd(name):
        if args.norm != "l2":
            raise UsageError("SGD runs use the l2 norm")
        trace = sgd(ds, rule, args.k, option=args.option.upper(), seed=args.seed, checkpoint_stride=args.stride)
    else:
        if args.option != "a":
            raise UsageError("--option applies only to SGD rules")
        trace = steepest_descent(ctx, rule, args.k, checkpoint_stride=args.stride)
    prefix = args.out or "trace"
    com = _comments(args, "solve")
    _write(prefix + ".csv", trace.to_csv_text(com))
    _write(prefix + ".betas.csv", trace.betas_csv_text(com))
    meta = _header(args, "solve")
    meta["trace"] = trace.to_dict()
    _write(prefix + ".json", dumps(meta))
    return 0


def _selected(theorem: str, status: Status) -> list[str]:
    if theorem != "all":
        return [theorem]
    if status is Status.NON_SEPARABLE:
        return ["3.1", "3.2", "3.3", "propA.2", "2.1"]
    if status is Status.SEPARABLE:
        return ["3.4", "lemma2.4", "propA.2"]
    return []


def cmd_verify(args) -> int:
    ds = _load(args)
    inputs = build_inputs(ds, args.norm, tol_ill=args.tol_ill, seed=args.seed,
                          gamma=tuple(float(g) for g in args.gamma.split(",")))
    status = inputs.status
    chosen = _selected(args.theorem, status)
    reports: list[GuaranteeReport] = []
    notes = []
    if not chosen:
        notes.append(f"no guarantee applies to status {status.value}")
    sgd_ids = [t for t in chosen if t in ("4.2", "4.3", "4.4", "4.5")]
    det_ids = [t for t in chosen if t not in sgd_ids]
    refs = random_references(ds.p, args.seed)
    if det_ids:
        default = "sepl2" if status is Status.SEPARABLE else "nonsep"
        if args.theorem in ("3.4",):
            default = "sepl2"
        name = args.rule or default
        if _is_sgd(name):
            raise UsageError(f"theorem {args.theorem} needs a deterministic rule")
        k = args.k if args.k is not None else 2000
        rule = _rule(args, inputs.ctx, k, default)
        trace = steepest_descent(inputs.ctx, rule, k, checkpoint_stride=1 if k <= 20000 else args.stride)
        table = {"3.1": eval_thm_sd_generic, "3.2": eval_thm32, "3.3": eval_thm33, "3.4": eval_thm34,
                 "lemma2.4": eval_margin_gradient_lemma, "2.1": lambda i, t: eval_prop21(i, seed=args.seed),
                 "propA.2": lambda i, t: eval_iterate_bound(i, t, refs)}
        for t in det_ids:
            reports.append(table[t](inputs, trace))
    if sgd_ids:
        if args.norm != "l2":
            raise UsageError("SGD guarantees use the l2 norm")
        name = args.rule or "rcor"
        if not _is_sgd(name):
            raise UsageError("SGD guarantees need --rule const or rcor")
        k = args.k if args.k is not None else 1000
        rule = _rule(args, inputs.ctx, k, "rcor")
        separable = "4.5" in sgd_ids
        trials = args.trials or (500 if separable else 1000)
        option = args.option.upper() if args.option else ("B" if separable else "A")
        batch = sgd_trials(ds, rule, k, option, base_seed=args.seed, trials=trials, refs=refs)
        if separable:
            reports.append(eval_sgd_sep(inputs, batch))
        else:
            rep = eval_sgd_nonsep(inputs, batch, seed=args.seed)
            keep = {"4.2": ("4.2", "4.3(premise)"), "4.3": ("4.3", "4.3(premise)"), "4.4": ("4.4(i)", "4.4(ii)")}
            names = set().union(*(keep[t] for t in sgd_ids))
            rep.items = [c for c in rep.items if c.item in names]
            reports.append(rep)
        reports.append(eval_iterate_bound_sgd(inputs, batch))
    out = _header(args, "verify")
    out.update(inputs=inputs.to_dict(), reports=[r.to_dict() for r in reports], notes=notes,
               holds=all(r.holds for r in reports))
    if args.out:
        _write(args.out, dumps(out))
    for r in reports:
        print(f"== {r.theorem}")
        print(r.table())
    for n_ in notes:
        print(n_)
    return 0 if out["holds"] else 1


def cmd_perturb(args) -> int:
    ds = _load(args)
    if args.to == "separable":
        pert = perturb_to_separable(ds, args.norm, eps=args.eps, tol_ill=args.tol_ill)
    else:
        pert = perturb_to_nonseparable(ds, args.norm, tol_ill=args.tol_ill)
    prefix = args.out or "perturbed"
    _write(prefix + ".csv", dataset_to_csv_text(pert.perturbed, comments=_comments(args, "perturb")))
    out = _header(args, "perturb")
    out["perturbation"] = pert.to_dict()
    _write(prefix + ".json", dumps(out))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (prefix for multi-file outputs)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="CSV path or fixture:<ill_posed|contradictory|planted_pair>")
    data.add_argument("--label-col", default="-1", help="label column index or header name")
    data.add_argument("--zero-one", action="store_true", help="labels are 0/1 instead of -1/+1")
    data.add_argument("--norm", choices=[n.value for n in Norm], default="l2")
    data.add_argument("--tol-ill", type=float, default=1e-8)

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--rule", choices=RULES, default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--L", type=float, default=None)
    run.add_argument("--R", type=float, default=None)
    run.add_argument("--stride", type=int, default=100, help="checkpoint stride for stored iterates")

    p = argparse.ArgumentParser(prog="logitcond", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"logitcond {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common, data], help="condition numbers and status")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic dataset")
    g.add_argument("--kind", choices=["logistic", "planted"] + sorted(FIXTURES), default="logistic")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--p", type=int, default=2)
    g.add_argument("--beta-true", default=None, help="comma-separated true coefficients")
    g.add_argument("--margin", type=float, default=0.5)
    g.add_argument("--spread", type=float, default=1.0)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common, data, run], help="run a solver and write its trace")
    s.add_argument("--k", type=int, default=1000)
    s.add_argument("--option", choices=["a", "b"], default="a")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", parents=[common, data, run], help="run and check guarantees")
    v.add_argument("--theorem", choices=THEOREMS, default="all")
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--gamma", default="0.25,0.5")
    v.add_argument("--option", choices=["a", "b"], default=None)
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("perturb", parents=[common, data], help="minimal perturbation that flips the status")
    q.add_argument("--to", choices=["separable", "nonseparable"], required=True)
    q.add_argument("--eps", type=float, default=1e-3)
    q.set_defaults(func=cmd_perturb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except (UsageError, LogitCondError, ValueError, OSError) as e:
        print(f"logitcond: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
