"""Experiment driver: methods, baselines, sweeps and result files.

A run is fully determined by ``(config, seed)``. Every random stream (data,
test set, initialization, minibatch order) is derived from the seed with a
fixed tag, so grid points of a sweep share data streams for the same seed.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import CsvData, ExperimentConfig
from .datagen import SamplePlan, load_csv, make_u_pair, mixture_u_pair, perturb_priors, sample_mixture, subsample_to_prior
from .errors import ConfigError, UULearnError
from .estimators import GaussianMixtureSpec, LabeledSet, UnlabeledSet, true_risk_gaussian, zero_one_test_error
from .losses import ZERO_ONE
from .models import LinearModel, init_model, save_model
from .optim import Objective, train
from .rewrite import PriorTriple, ccn_backward_coefficients, pn_coefficients

__all__ = [
    "ExperimentResult",
    "run_method",
    "run_experiment",
    "sweep_closeness",
    "sweep_robustness",
    "sweep_sizes",
    "run_baselines",
    "bayes_linear_scorer",
    "spearman",
    "write_result",
    "write_summary",
]

log = logging.getLogger(__name__)

SMALL_PN_FRACTION = 0.1
_STREAMS = {"data": 1, "test": 2, "init": 3, "train": 4, "val": 5, "labeled": 6, "subsample": 7, "reference": 8}


def stream_seed(seed: int, name: str) -> int:
    return int(np.random.SeedSequence([int(seed), _STREAMS[name]]).generate_state(1)[0])


def mixture_spec(cfg: ExperimentConfig, pi: float | None = None) -> GaussianMixtureSpec:
    d = cfg.data
    return GaussianMixtureSpec(tuple(d.mean_pos), tuple(d.mean_neg), d.sigma, d.pi if pi is None else pi)


def bayes_linear_scorer(spec: GaussianMixtureSpec) -> LinearModel:
    """Posterior log-odds of an isotropic two-Gaussian mixture (linear in x)."""
    mp, mn = np.asarray(spec.mean_pos), np.asarray(spec.mean_neg)
    s2 = spec.sigma**2
    w = (mp - mn) / s2
    b = -(mp @ mp - mn @ mn) / (2 * s2) + math.log(spec.pi / (1 - spec.pi))
    return LinearModel(w, b)


@dataclass
class _Data:
    u1: object
    u2: object
    test: LabeledSet
    labeled: LabeledSet | None = None
    labeled_shift: LabeledSet | None = None
    validation: tuple | None = None
    spec: GaussianMixtureSpec | None = None


def _load_data(cfg: ExperimentConfig, seed: int, need_labels: bool) -> _Data:
    d = cfg.data
    n_lab = d.n + d.n_prime
    plan = SamplePlan(d.n, d.n_prime, d.theta, d.theta_prime, stream_seed(seed, "data"))
    val = None
    if isinstance(d, CsvData):
        test = load_csv(d.test)
        if not isinstance(test, LabeledSet):
            raise ConfigError("the csv test file needs a label column")
        if d.pool is None:
            if need_labels:
                raise ConfigError("this method needs labeled data but the config only has unlabeled files")
            u1 = load_csv(d.u1, declared_prior=d.theta)
            u2 = load_csv(d.u2, declared_prior=d.theta_prime)
            if isinstance(u1, LabeledSet) or isinstance(u2, LabeledSet):
                raise ConfigError("u1 and u2 must not carry a label column")
            if len(u1) < d.n or len(u2) < d.n_prime:
                raise ConfigError("u1/u2 files have fewer rows than n/n_prime")
            u1 = UnlabeledSet(u1.features[: d.n], d.theta)
            u2 = UnlabeledSet(u2.features[: d.n_prime], d.theta_prime)
            return _Data(u1, u2, test)
        pool = load_csv(d.pool)
        if not isinstance(pool, LabeledSet):
            raise ConfigError("the csv pool file needs a label column")
        u1, u2 = make_u_pair(pool.positives, pool.negatives, plan)
        if d.n_val:
            vplan = SamplePlan(d.n_val, d.n_val, d.theta, d.theta_prime, stream_seed(seed, "val"))
            val = make_u_pair(pool.positives, pool.negatives, vplan)
        labeled = shift = None
        if need_labels:
            rng = np.random.default_rng(stream_seed(seed, "labeled"))
            base = subsample_to_prior(pool, d.pi, stream_seed(seed, "labeled"))
            labeled = base.subset(rng.permutation(len(base))[:n_lab])
            base = subsample_to_prior(pool, max(d.theta, d.theta_prime), stream_seed(seed, "labeled"))
            shift = base.subset(rng.permutation(len(base))[:n_lab])
        return _Data(u1, u2, test, labeled, shift, val)

    spec = mixture_spec(cfg)
    u1, u2 = mixture_u_pair(spec, plan)
    if d.n_val:
        vplan = SamplePlan(d.n_val, d.n_val, d.theta, d.theta_prime, stream_seed(seed, "val"))
        val = mixture_u_pair(spec, vplan)
    test = sample_mixture(spec, d.n_test, stream_seed(seed, "test"))
    labeled = shift = None
    if need_labels:
        labeled = sample_mixture(spec, n_lab, stream_seed(seed, "labeled"))
        shifted = mixture_spec(cfg, pi=max(d.theta, d.theta_prime))
        shift = sample_mixture(shifted, n_lab, stream_seed(seed, "labeled"))
    return _Data(u1, u2, test, labeled, shift, val, spec)


def _small(data: LabeledSet, seed: int) -> LabeledSet:
    """Seeded 10% subsample, stratified by class so both classes survive."""
    rng = np.random.default_rng(stream_seed(seed, "subsample"))
    keep = []
    for label in (1, -1):
        idx = np.flatnonzero(data.labels == label)
        if len(idx):
            k = max(1, int(round(SMALL_PN_FRACTION * len(idx))))
            keep.append(rng.choice(idx, size=k, replace=False))
    return data.subset(np.sort(np.concatenate(keep)))


def _split(data: LabeledSet, method: str):
    if data.n_pos == 0 or data.n_neg == 0:
        raise ConfigError(f"{method}: labeled sample lacks one of the classes")
    return data.positives, data.negatives


def _build_model(cfg: ExperimentConfig, dim: int, seed: int):
    if cfg.model.kind == "linear":
        return init_model("linear", [dim], stream_seed(seed, "init"))
    return init_model("mlp", [dim, *cfg.model.hidden, 1], stream_seed(seed, "init"))


def run_method(cfg: ExperimentConfig, seed: int, method: str | None = None, out_dir=None) -> dict:
    """Train one method for one seed and return its per-seed record.

    Every method shares the model family, optimizer settings and seed
    streams, so differences between methods isolate the objective.
    """
    method = method or cfg.method
    d = cfg.data
    need_labels = method in ("oracle_pn", "small_pn", "small_pn_prior_shift")
    data = _load_data(cfg, seed, need_labels)
    true_priors = PriorTriple(d.pi, d.theta, d.theta_prime)
    u1, u2 = true_priors.orient(data.u1, data.u2)
    canon = PriorTriple(true_priors.pi, true_priors.theta, true_priors.theta_prime)
    train_priors = canon
    if cfg.perturbation is not None:
        train_priors = perturb_priors(canon, *cfg.perturbation)
    validation = None
    if data.validation is not None:
        validation = true_priors.orient(*data.validation)

    tcfg = cfg.train.to_train_config(stream_seed(seed, "train"))
    model = _build_model(cfg, u1.dim, seed)
    objective = None
    set1, set2 = u1, u2
    if method == "uu":
        pass
    elif method == "ber_fc":
        train_priors = train_priors.with_pi(0.5)
    elif method == "uu_biased":
        objective = Objective(pn_coefficients(d.pi))
    elif method == "ccn":
        n1, n2 = len(u1), len(u2)
        objective = Objective(ccn_backward_coefficients(train_priors), (n1 / (n1 + n2), n2 / (n1 + n2)))
    elif method == "oracle_pn":
        set1, set2 = _split(data.labeled, method)
        objective = Objective(pn_coefficients(d.pi))
    elif method == "small_pn":
        set1, set2 = _split(_small(data.labeled, seed), method)
        objective = Objective(pn_coefficients(d.pi))
    elif method == "small_pn_prior_shift":
        set1, set2 = _split(_small(data.labeled_shift, seed), method)
        objective = Objective(pn_coefficients(max(d.theta, d.theta_prime)))
    else:
        raise ConfigError(f"unknown method {method!r}")

    trained, history = train(
        model, set1, set2, train_priors, tcfg,
        validation=validation, test=data.test, objective=objective,
    )
    record = {
        "seed": seed,
        "method": method,
        "test_error": zero_one_test_error(trained, data.test).value,
        "true_error": None,
        "final_train_risk": history.train_risk[-1] if history.train_risk else None,
        "negative_risk_epochs": history.negative_risk_epochs,
        "negative_batches": history.negative_batches,
        "params": [float(v) for v in trained.params],
        "history": history.to_dict(),
    }
    if data.spec is not None and isinstance(trained, LinearModel):
        record["true_error"] = true_risk_gaussian(trained, data.spec, ZERO_ONE)
    if out_dir is not None:
        run_dir = Path(out_dir) / f"seed_{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        history.write_csv(run_dir / "history.csv")
        save_model(trained, run_dir / "model.json")
    return record


def _job(args):
    cfg, seed, method, run_dir = args
    return run_method(cfg, seed, method, run_dir)


@dataclass
class ExperimentResult:
    method: str
    config: dict
    runs: list
    label: str = ""
    grid_value: object = None
    wall_clock_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def test_errors(self) -> list:
        return [r["test_error"] for r in self.runs]

    @property
    def mean(self) -> float:
        return float(np.mean(self.test_errors))

    @property
    def std(self) -> float:
        vals = self.test_errors
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    def to_dict(self, wall_clock: bool = True) -> dict:
        doc = {
            "label": self.label,
            "method": self.method,
            "grid_value": self.grid_value,
            "seeds": [r["seed"] for r in self.runs],
            "test_errors": self.test_errors,
            "mean_test_error": self.mean,
            "std_test_error": self.std,
            "true_errors": [r["true_error"] for r in self.runs],
            "runs": self.runs,
            "config": self.config,
            **self.extra,
        }
        if wall_clock:
            doc["wall_clock_seconds"] = self.wall_clock_seconds
        return doc


def _run_seeds(jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_job, jobs))
    return [_job(job) for job in jobs]


def run_experiment(cfg: ExperimentConfig, method: str | None = None, seeds=None,
                   label: str = "", grid_value=None, workers: int = 1, out_dir=None) -> ExperimentResult:
    """Run one method over the configured seeds (or ``seeds``) and aggregate."""
    method = method or cfg.method
    seeds = list(cfg.seeds if seeds is None else seeds)
    start = time.perf_counter()
    run_dir = None if out_dir is None else Path(out_dir) / (label or method)
    runs = _run_seeds([(cfg, s, method, run_dir) for s in seeds], workers)
    runs.sort(key=lambda r: r["seed"])
    result = ExperimentResult(
        method=method,
        config=cfg.model_dump(mode="json"),
        runs=runs,
        label=label or method,
        grid_value=grid_value,
        wall_clock_seconds=time.perf_counter() - start,
    )
    if run_dir is not None:
        write_result(result, run_dir / "result.json")
    return result


def _sweep(cfg, points, make_cfg, method, label_fmt, workers, out_dir):
    results = []
    for value in points:
        label = label_fmt(value)
        try:
            point_cfg = make_cfg(value)
            results.append(run_experiment(point_cfg, method, label=label, grid_value=value,
                                          workers=workers, out_dir=out_dir))
        except UULearnError as exc:
            log.warning("grid point %s failed: %s", label, exc)
            results.append({"label": label, "grid_value": list(value) if isinstance(value, tuple) else value,
                            "method": method or cfg.method,
                            "error": f"{type(exc).__name__}: {exc}"})
    return results


def sweep_closeness(cfg: ExperimentConfig, grid=None, method=None, workers=1, out_dir=None) -> list:
    """One result per theta' in the grid, with the same seeds at every point."""
    grid = list(grid if grid is not None else cfg.sweep.theta_prime or [])
    if not grid:
        raise ConfigError("sweep.theta_prime grid is empty")
    m = method or cfg.method

    def make(value):
        PriorTriple(cfg.data.pi, cfg.data.theta, value)  # raises the specific prior error
        return cfg.updated(**{"data.theta_prime": value})

    return _sweep(cfg, grid, make, m, lambda v: f"{m}_theta_prime_{v:g}", workers, out_dir)


def sweep_robustness(cfg: ExperimentConfig, pairs=None, method=None, workers=1, out_dir=None) -> list:
    """Data from the true priors, training with (eps * theta, eps' * theta')."""
    pairs = [tuple(p) for p in (pairs if pairs is not None else cfg.sweep.eps_pairs or [])]
    if not pairs:
        raise ConfigError("sweep.eps_pairs grid is empty")
    m = method or cfg.method

    def make(pair):
        point = cfg.updated(perturbation=list(pair))
        canon = PriorTriple(cfg.data.pi, cfg.data.theta, cfg.data.theta_prime)
        perturb_priors(canon, *pair)  # surface out-of-range pairs before running
        return point

    return _sweep(cfg, pairs, make, m, lambda p: f"{m}_eps_{p[0]:g}_{p[1]:g}", workers, out_dir)


def sweep_sizes(cfg: ExperimentConfig, grid=None, method=None, workers=1, out_dir=None) -> dict:
    """One result per n plus excess zero-one risk and its log-log slope.

    For a linear model on the Gaussian mixture the reference risk is exact:
    the class contains the Bayes rule, so R(g*) is the Bayes error. Otherwise
    g* is approximated by training the same method on a sample
    ``sweep.reference_scale`` times larger than the largest grid point.
    """
    grid = list(grid if grid is not None else cfg.sweep.n or [])
    if not grid:
        raise ConfigError("sweep.n grid is empty")
    if any(int(n) < 1 for n in grid):
        raise ConfigError("sample sizes in sweep.n must be positive")
    m = method or cfg.method

    def make(n):
        changes = {"data.n": int(n)}
        if cfg.sweep.n_prime_follows_n:
            changes["data.n_prime"] = int(n)
        return cfg.updated(**changes)

    results = _sweep(cfg, grid, make, m, lambda n: f"{m}_n_{n}", workers, out_dir)
    exact = cfg.data.kind == "mixture" and cfg.model.kind == "linear"
    if exact:
        spec = mixture_spec(cfg)
        reference = true_risk_gaussian(bayes_linear_scorer(spec), spec, ZERO_ONE)
        ref_kind = "bayes-error-exact"
    else:
        big = max(int(n) for n in grid) * cfg.sweep.reference_scale
        ref_cfg = make(big)
        ref = run_experiment(ref_cfg, m, seeds=cfg.seeds[:1], label=f"{m}_reference")
        reference = ref.mean
        ref_kind = f"trained-approximation (n={big}, first seed)"
    ns, excess = [], []
    for res in results:
        if isinstance(res, ExperimentResult):
            errs = [r["true_error"] if exact else r["test_error"] for r in res.runs]
            ex = float(np.mean(errs)) - reference
            res.extra.update(excess_risk=ex, reference_risk=reference, reference_kind=ref_kind)
            ns.append(res.grid_value)
            excess.append(ex)
    slope = math.nan
    if len(ns) >= 2 and all(e > 0 for e in excess):
        slope = float(np.polyfit(np.log(ns), np.log(excess), 1)[0])
    return {"results": results, "reference_risk": reference, "reference_kind": ref_kind,
            "n": ns, "excess_risk": excess, "loglog_slope": slope}


def run_baselines(cfg: ExperimentConfig, methods=None, workers=1, out_dir=None) -> list:
    """Every method in ``methods`` (default ``cfg.methods``) on identical seeds."""
    results = []
    for method in methods or cfg.methods:
        try:
            results.append(run_experiment(cfg, method, label=method, workers=workers, out_dir=out_dir))
        except UULearnError as exc:
            log.warning("method %s failed: %s", method, exc)
            results.append({"label": method, "method": method, "error": f"{type(exc).__name__}: {exc}"})
    return results


def spearman(x, y) -> float:
    from scipy.stats import spearmanr

    return float(spearmanr(x, y).statistic)


def result_json(result: ExperimentResult, wall_clock: bool = True) -> str:
    return json.dumps(result.to_dict(wall_clock), sort_keys=True, indent=2) + "\n"


def write_result(result: ExperimentResult, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(result_json(result))


def write_summary(results, path) -> None:
    """One CSV row per grid point: label, grid value, method, mean, std, seeds, error."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "grid_value", "method", "mean_test_error", "std_test_error", "n_seeds", "error"])
        for res in results:
            if isinstance(res, ExperimentResult):
                gv = res.grid_value
                gv = " ".join(map(repr, gv)) if isinstance(gv, (tuple, list)) else gv
                writer.writerow([res.label, "" if gv is None else gv, res.method,
                                 repr(res.mean), repr(res.std), len(res.runs), ""])
            else:
                gv = res.get("grid_value", "")
                gv = " ".join(map(repr, gv)) if isinstance(gv, (tuple, list)) else gv
                writer.writerow([res["label"], gv, res["method"], "", "", 0, res["error"]])
