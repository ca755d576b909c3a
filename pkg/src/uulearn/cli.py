"""Command-line entry point: ``uulearn <subcommand> ...``.

Exit codes: 0 on success, 2 on configuration or input errors, 3 when a
training run aborts.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import harness
from .bounds import BoundInputs, bound_terms, empirical_rademacher_linear
from .config import ExperimentConfig, load_config
from .datagen import SamplePlan, load_csv, mixture_u_pair, sample_mixture, save_csv
from .errors import AbortedRunError, ConfigError, UULearnError
from .estimators import LabeledSet, empirical_risk_uu, empirical_risk_uu_sym, zero_one_test_error
from .losses import get_loss, loss_constants
from .models import load_model
from .rewrite import (
    PriorTriple,
    ccn_backward_coefficients,
    classify_reduction,
    correction_coefficients,
    cost_weights,
    single_set_witness,
)

EXIT_OK, EXIT_CONFIG, EXIT_ABORTED = 0, 2, 3

log = logging.getLogger("uulearn")


def _dump(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.updated(seeds=[args.seed])
    return cfg


def _out(args, cfg: ExperimentConfig | None = None) -> Path:
    return Path(args.out or (cfg.out if cfg is not None else "runs"))


def _priors(args) -> PriorTriple:
    if args.config and args.pi is None:
        d = load_config(args.config).data
        return PriorTriple(d.pi, d.theta, d.theta_prime)
    if None in (args.pi, args.theta, args.theta_prime):
        raise ConfigError("give --pi, --theta and --theta-prime (or --config)")
    return PriorTriple(args.pi, args.theta, args.theta_prime)


def cmd_gen(args) -> int:
    cfg = _config(args)
    d = cfg.data
    if d.kind != "mixture":
        raise ConfigError("gen only writes Gaussian-mixture data")
    out = _out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seeds[0]
    spec = harness.mixture_spec(cfg)
    plan = SamplePlan(d.n, d.n_prime, d.theta, d.theta_prime, harness.stream_seed(seed, "data"))
    u1, u2 = mixture_u_pair(spec, plan)
    save_csv(out / "u1.csv", u1)
    save_csv(out / "u2.csv", u2)
    save_csv(out / "test.csv", sample_mixture(spec, d.n_test, harness.stream_seed(seed, "test")))
    save_csv(out / "pool.csv", sample_mixture(spec, d.n + d.n_prime, harness.stream_seed(seed, "labeled")))
    _dump({"out": str(out), "files": ["u1.csv", "u2.csv", "test.csv", "pool.csv"], "seed": seed})
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    result = harness.run_experiment(cfg, workers=args.workers, out_dir=_out(args, cfg))
    _dump({"label": result.label, "mean_test_error": result.mean, "std_test_error": result.std,
           "test_errors": result.test_errors})
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    if args.test:
        test = load_csv(args.test)
        if not isinstance(test, LabeledSet):
            raise ConfigError("--test needs a labeled CSV")
        _dump(zero_one_test_error(model, test).to_dict())
        return EXIT_OK
    if not (args.u1 and args.u2):
        raise ConfigError("give --test, or --u1 and --u2 with priors")
    priors = _priors(args)
    u1 = load_csv(args.u1, declared_prior=priors.theta)
    u2 = load_csv(args.u2, declared_prior=priors.theta_prime)
    loss = get_loss(args.loss)
    estimator = empirical_risk_uu_sym if args.estimator == "uu_sym" else empirical_risk_uu
    _dump(estimator(model, u1, u2, priors, loss).to_dict())
    return EXIT_OK


def cmd_rewrite_check(args) -> int:
    priors = _priors(args)
    doc = {
        "priors": priors.as_dict(),
        "reduction": classify_reduction(priors).value,
        "coefficients": asdict(correction_coefficients(priors)),
        "cost_weights": asdict(cost_weights(priors)),
        "ccn_backward": asdict(ccn_backward_coefficients(priors)),
    }
    witness = single_set_witness(priors.pi)
    doc["single_set"] = {**asdict(witness), "feasible": witness.feasible}
    _dump(doc)
    return EXIT_OK


def cmd_bound(args) -> int:
    priors = _priors(args)
    loss = get_loss(args.loss)
    consts = loss_constants(loss, args.c_g)
    if not consts.bounds_supported:
        raise ConfigError(f"{loss.name} loss has no Lipschitz constant; the bound does not apply")
    w = cost_weights(priors)
    rad = {"rad_n": args.rad_n, "rad_n_prime": args.rad_n_prime}
    n, n_prime = args.n, args.n_prime
    if args.u1 and args.u2:
        sizes = []
        for key, path, prior in (("rad_n", args.u1, priors.theta), ("rad_n_prime", args.u2, priors.theta_prime)):
            X = load_csv(path, declared_prior=prior).features
            # constant column so the class covers the bias term
            X = np.hstack([X, np.ones((len(X), 1))])
            rad[key] = empirical_rademacher_linear(X, args.c_w, args.mc_rounds, args.seed or 0).value
            sizes.append(len(X))
        n, n_prime = sizes
    if None in (n, n_prime, rad["rad_n"], rad["rad_n_prime"]):
        raise ConfigError("give --n, --n-prime, --rad-n and --rad-n-prime, or --u1/--u2 with --c-w")
    inputs = BoundInputs(consts.l_ell, consts.c_ell, w.alpha, w.alpha_prime, n, n_prime, args.delta, **rad)
    _dump({
        "inputs": asdict(inputs),
        "estimation_error": bound_terms(inputs, 2.0),
        "uniform_deviation": bound_terms(inputs, 1.0),
    })
    return EXIT_OK


def _write_sweep(results, out: Path, name: str, extra=None) -> None:
    harness.write_summary(results, out / name / "summary.csv")
    if extra is not None:
        path = out / name / "sweep.json"
        path.write_text(json.dumps(extra, sort_keys=True, indent=2) + "\n")


def _report(results) -> None:
    rows = []
    for res in results:
        if isinstance(res, harness.ExperimentResult):
            rows.append({"label": res.label, "mean_test_error": res.mean, "std_test_error": res.std})
        else:
            rows.append(res)
    _dump(rows)


def cmd_sweep_closeness(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg) / "closeness"
    results = harness.sweep_closeness(cfg, workers=args.workers, out_dir=out)
    _write_sweep(results, out.parent, "closeness")
    _report(results)
    return EXIT_OK


def cmd_sweep_robustness(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg) / "robustness"
    results = harness.sweep_robustness(cfg, workers=args.workers, out_dir=out)
    _write_sweep(results, out.parent, "robustness")
    _report(results)
    return EXIT_OK


def cmd_sweep_sizes(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg) / "sizes"
    sweep = harness.sweep_sizes(cfg, workers=args.workers, out_dir=out)
    for res in sweep["results"]:
        if isinstance(res, harness.ExperimentResult):
            harness.write_result(res, out / res.label / "result.json")
    fit = {k: sweep[k] for k in ("n", "excess_risk", "loglog_slope", "reference_risk", "reference_kind")}
    _write_sweep(sweep["results"], out.parent, "sizes", fit)
    _report(sweep["results"])
    _dump(fit)
    return EXIT_OK


def cmd_baselines(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg) / "baselines"
    results = harness.run_baselines(cfg, workers=args.workers, out_dir=out)
    _write_sweep(results, out.parent, "baselines")
    _report(results)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uulearn", description="Binary classification from two unlabeled sets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="run only this seed")
        p.add_argument("--out", help="output directory (defaults to the config's out)")
        p.set_defaults(func=func)
        return p

    def priors(p):
        p.add_argument("--pi", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--theta-prime", type=float)

    add("gen", cmd_gen, "write mixture CSVs")
    for name, func, help_ in (
        ("train", cmd_train, "train the configured method over the configured seeds"),
        ("sweep-closeness", cmd_sweep_closeness, "sweep theta' toward theta"),
        ("sweep-robustness", cmd_sweep_robustness, "train with misspecified priors"),
        ("sweep-sizes", cmd_sweep_sizes, "sweep n and fit the excess-risk decay"),
        ("baselines", cmd_baselines, "run every configured method"),
    ):
        add(name, func, help_).add_argument("--workers", type=int, default=1)

    p = add("eval", cmd_eval, "evaluate a saved model")
    priors(p)
    p.add_argument("--model", required=True)
    p.add_argument("--test", help="labeled CSV: report zero-one error")
    p.add_argument("--u1")
    p.add_argument("--u2")
    p.add_argument("--loss", default="sigmoid")
    p.add_argument("--estimator", choices=["uu", "uu_sym"], default="uu")

    p = add("rewrite-check", cmd_rewrite_check, "print correction coefficients as JSON")
    priors(p)

    p = add("bound", cmd_bound, "print the bound decomposition as JSON")
    priors(p)
    p.add_argument("--loss", default="sigmoid")
    p.add_argument("--c-g", type=float, default=1.0, help="bound on |g(x)|")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--n", type=int)
    p.add_argument("--n-prime", type=int)
    p.add_argument("--rad-n", type=float)
    p.add_argument("--rad-n-prime", type=float)
    p.add_argument("--u1", help="unlabeled CSV for a Monte-Carlo Rademacher estimate")
    p.add_argument("--u2")
    p.add_argument("--c-w", type=float, default=1.0, help="norm bound of the linear class")
    p.add_argument("--mc-rounds", type=int, default=2000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except AbortedRunError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except (UULearnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
