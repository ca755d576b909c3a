"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (about five minutes on
one core); the summary block at the end lists every criterion.
"""

import json
import math
import re
import time

import numpy as np
import pytest
from scipy.stats import norm

from uulearn.bounds import BoundInputs, empirical_rademacher_linear, uniform_deviation_bound
from uulearn.cli import main as cli_main
from uulearn.config import parse_config
from uulearn.datagen import SamplePlan, mixture_u_pair
from uulearn.estimators import (
    GaussianMixtureSpec,
    corrected_risk,
    empirical_risk_pn,
    empirical_risk_pu,
    empirical_risk_uu,
    empirical_risk_uu_sym,
    true_risk_gaussian,
)
from uulearn.harness import run_experiment, sweep_closeness, sweep_robustness, sweep_sizes
from uulearn.losses import RAMP, SIGMOID, loss_constants, loss_value
from uulearn.models import LinearModel, init_model, parameter_gradient, risk_gradient
from uulearn.rewrite import PriorTriple, correction_coefficients, cost_weights, single_set_witness

pytestmark = pytest.mark.slow

SPEC = GaussianMixtureSpec.standard(0.3)
PRIORS = PriorTriple(0.3, 0.9, 0.4)


def bayes_error_oracle(pi=0.3):
    # posterior log-odds 2 (x1 + x2) + ln(pi / (1 - pi)); its projection onto (1, 1) / sqrt 2
    # is N(+-sqrt 2, 1) per class with threshold t = -ln(pi / (1 - pi)) / (2 sqrt 2)
    t = -math.log(pi / (1 - pi)) / (2 * math.sqrt(2))
    return pi * norm.cdf(t - math.sqrt(2)) + (1 - pi) * norm.sf(t + math.sqrt(2))


def experiment(**data_over):
    base = {
        "data": {"kind": "mixture", "pi": 0.3, "theta": 0.9, "theta_prime": 0.4,
                 "n": 2000, "n_prime": 1000, "n_test": 10000},
        "train": {"optimizer": "sgd", "initial_lr": 0.01, "batch_size": 128, "epochs": 500, "loss": "sigmoid"},
        "seeds": list(range(10)),
    }
    train = data_over.pop("train", {})
    base["data"].update(data_over)
    base["train"].update(train)
    return parse_config(base)


def fd_gradient(f, params, h=1e-6):
    g = np.empty_like(params)
    for i in range(params.size):
        up, down = params.copy(), params.copy()
        up[i] += h
        down[i] -= h
        g[i] = (f(up) - f(down)) / (2 * h)
    return g


class TestAcceptance:
    def test_01_coefficient_oracle(self, acceptance):
        rng = np.random.default_rng(1)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(10_000):
            pi = rng.uniform(0.0, 1.0)
            t1, t2 = rng.uniform(0.0, 1.0, size=2)
            p = PriorTriple(pi, t1, t2)
            k = correction_coefficients(p)
            th, tp = p.theta, p.theta_prime
            worst = max(worst,
                        abs(k.a * th + k.d * tp - pi),
                        abs(k.b * th + k.c * tp),
                        abs(k.a * (1 - th) + k.d * (1 - tp)),
                        abs(k.b * (1 - th) + k.c * (1 - tp) - (1 - pi)))
        elapsed = time.perf_counter() - start
        ok = worst <= 1e-12 and elapsed < 1.0
        assert acceptance(1, "coefficient oracle", ok, f"max residual {worst:.2e}, {elapsed:.2f}s")

    def test_02_unbiasedness(self, acceptance):
        start = time.perf_counter()
        g = LinearModel([1.0, 0.5], -0.2)
        truth = true_risk_gaussian(g, SPEC, SIGMOID)
        vals = np.array([
            empirical_risk_uu(g, *mixture_u_pair(SPEC, SamplePlan(500, 500, 0.9, 0.4, s)), PRIORS, SIGMOID).value
            for s in range(10_000)
        ])
        elapsed = time.perf_counter() - start
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        z = (vals.mean() - truth) / se
        ok = abs(z) <= 3 and elapsed < 60
        assert acceptance(2, "unbiasedness", ok,
                          f"MC mean {vals.mean():.6f} vs true {truth:.6f} ({z:+.2f} SE), {elapsed:.1f}s")

    def test_03_estimator_equivalence(self, acceptance):
        rng = np.random.default_rng(3)
        worst = 0.0
        for trial in range(100):
            loss = SIGMOID if trial % 2 else RAMP
            d = int(rng.integers(1, 5))
            model = LinearModel(rng.normal(size=d), rng.normal()) if trial % 3 else init_model("mlp", [d, 8, 1], trial)
            X1 = rng.normal(size=(int(rng.integers(1, 200)), d))
            X2 = rng.normal(size=(int(rng.integers(1, 200)), d))
            t1, t2 = rng.uniform(0, 1, size=2)
            while abs(t1 - t2) < 1e-3:
                t2 = rng.uniform(0, 1)
            p = PriorTriple(rng.uniform(0.01, 0.99), t1, t2)
            a = empirical_risk_uu(model, X1, X2, p, loss).value
            b = empirical_risk_uu_sym(model, X1, X2, p, loss).value
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
        assert acceptance(3, "estimator equivalence", worst <= 1e-9, f"max relative gap {worst:.2e}")

    def test_04_reductions(self, acceptance):
        rng = np.random.default_rng(4)
        pn_exact, pu_worst = True, 0.0
        for _ in range(50):
            pi = rng.uniform(0.05, 0.95)
            g = LinearModel(rng.normal(size=3), rng.normal())
            P, N = rng.normal(size=(int(rng.integers(1, 100)), 3)), rng.normal(size=(int(rng.integers(1, 100)), 3))
            pn_exact &= (empirical_risk_uu(g, P, N, PriorTriple(pi, 1.0, 0.0), SIGMOID).value
                         == empirical_risk_pn(g, P, N, pi, SIGMOID).value)
            # PU form written out inline, term by term
            k = correction_coefficients(PriorTriple(pi, 1.0, pi))
            sp, su = g.forward(P), g.forward(N)
            uu_terms = np.array([k.a * loss_value(SIGMOID, sp).mean(), k.b * loss_value(SIGMOID, -sp).mean(),
                                 k.c * loss_value(SIGMOID, -su).mean(), k.d * loss_value(SIGMOID, su).mean()])
            pu_terms = np.array([pi * loss_value(SIGMOID, sp).mean(), -pi * loss_value(SIGMOID, -sp).mean(),
                                 loss_value(SIGMOID, -su).mean(), 0.0])
            total = empirical_risk_uu(g, P, N, PriorTriple(pi, 1.0, pi), SIGMOID).value
            pu_worst = max(pu_worst, np.max(np.abs(uu_terms - pu_terms)),
                           abs(total - empirical_risk_pu(g, P, N, pi, SIGMOID).value))
        ok = pn_exact and pu_worst <= 1e-12
        assert acceptance(4, "reductions", ok, f"PN bit-exact={pn_exact}, PU max term gap {pu_worst:.2e}")

    def test_05_impossibility_witness(self, acceptance):
        grid = np.round(np.arange(1, 100) * 0.01, 2)
        feasible = [pi for pi in grid if single_set_witness(pi).feasible]
        undefined = [float(pi) for pi in grid if single_set_witness(pi).theta_required is None]
        ok = not feasible and undefined == [0.5]
        assert acceptance(5, "impossibility witness", ok, f"{len(feasible)} feasible of 99, undefined at {undefined}")

    def test_06_linear_mixture_reproduction(self, acceptance):
        start = time.perf_counter()
        cfg = experiment()
        uu = run_experiment(cfg, "uu")
        pn = run_experiment(cfg, "oracle_pn")
        elapsed = time.perf_counter() - start
        bayes = bayes_error_oracle()
        ok = (abs(uu.mean - pn.mean) <= 0.02 and abs(uu.mean - bayes) <= 0.02 and abs(pn.mean - bayes) <= 0.02
              and elapsed < 300)
        assert acceptance(6, "linear mixture reproduction", ok,
                          f"UU {uu.mean:.4f}+-{uu.std:.4f}, Oracle-PN {pn.mean:.4f}+-{pn.std:.4f}, "
                          f"Bayes {bayes:.4f}, {elapsed:.0f}s")

    def test_07_gradient_checks(self, acceptance):
        rng = np.random.default_rng(7)
        worst_param, worst_risk = 0.0, 0.0
        for trial in range(20):
            model = init_model("mlp", [2, 64, 64, 64, 1], 700 + trial)
            model.params[:] += 0.05 * rng.normal(size=model.n_params)
            probe = model.copy()
            x = rng.normal(size=2)

            def score(p):
                probe.set_params(p)
                return probe.forward(x)

            fd = fd_gradient(score, model.params.copy())
            an = parameter_gradient(model, x)
            worst_param = max(worst_param, np.max(np.abs(an - fd)) / np.max(np.abs(fd)))

            B1, B2 = rng.normal(size=(6, 2)), rng.normal(size=(4, 2))
            p = PriorTriple(rng.uniform(0.1, 0.9), rng.uniform(0.55, 1.0), rng.uniform(0.0, 0.45))
            k = correction_coefficients(p)

            def risk(params):
                probe.set_params(params)
                return corrected_risk(probe.forward(B1), probe.forward(B2), k, SIGMOID)

            fd = fd_gradient(risk, model.params.copy())
            an = risk_gradient(model, B1, B2, k, SIGMOID)
            worst_risk = max(worst_risk, np.max(np.abs(an - fd)) / np.max(np.abs(fd)))
        ok = worst_param <= 1e-5 and worst_risk <= 1e-5
        assert acceptance(7, "gradient checks", ok,
                          f"parameter_gradient {worst_param:.2e}, risk_gradient {worst_risk:.2e}")

    def test_08_closeness_trend(self, acceptance):
        cfg = experiment(n=500, n_prime=500, train={"initial_lr": 0.05})
        grid = [0.1, 0.2, 0.3, 0.4, 0.5]
        uu = [r.mean for r in sweep_closeness(cfg, grid, method="uu")]
        ccn = [r.mean for r in sweep_closeness(cfg, grid, method="ccn")]
        drops = [uu[i] - uu[i + 1] for i in range(len(uu) - 1) if uu[i + 1] < uu[i]]
        trend_ok = len(drops) <= 1 and all(d <= 0.003 for d in drops)
        uu_deg, ccn_deg = uu[-1] - uu[0], ccn[-1] - ccn[0]
        ok = trend_ok and ccn_deg > uu_deg
        fmt = lambda v: "/".join(f"{x:.4f}" for x in v)
        assert acceptance(8, "closeness trend", ok,
                          f"UU {fmt(uu)} (inversions {len(drops)}), CCN {fmt(ccn)}; "
                          f"degradation UU {uu_deg:+.4f} vs CCN {ccn_deg:+.4f}")

    def test_09_robustness(self, acceptance):
        cfg = experiment(theta=0.7, theta_prime=0.3, n=2000, n_prime=2000, train={"epochs": 200})
        pairs = [(0.8, 0.8), (0.9, 0.9), (1.0, 1.0), (1.1, 1.1), (1.2, 1.2),
                 (0.8, 1.2), (0.9, 1.1), (1.1, 0.9), (1.2, 0.8)]
        results = sweep_robustness(cfg, pairs)
        failed = [r["label"] for r in results if isinstance(r, dict)]
        means = [r.mean for r in results if not isinstance(r, dict)]
        spread = max(means) - min(means)
        ok = not failed and spread <= 0.015
        assert acceptance(9, "robustness", ok,
                          f"{len(means)} pairs, mean errors {min(means):.4f}..{max(means):.4f}, "
                          f"spread {100 * spread:.2f} points")

    def test_10_decay(self, acceptance):
        cfg = experiment(n=100, n_prime=100)
        sweep = sweep_sizes(cfg, [100, 400, 1600, 6400])
        slope = sweep["loglog_slope"]
        ok = -0.7 <= slope <= -0.3
        excess = ", ".join(f"n={n}: {e:.2e}" for n, e in zip(sweep["n"], sweep["excess_risk"]))
        assert acceptance(10, "decay", ok, f"slope {slope:.3f} (band [-0.7, -0.3]); excess {excess}")

    def test_11_bound_validity(self, acceptance):
        rng = np.random.default_rng(11)
        scorers = [LinearModel(rng.normal(size=2), rng.normal()) for _ in range(50)]
        truth = np.array([true_risk_gaussian(g, SPEC, SIGMOID) for g in scorers])
        c_w = max(float(np.linalg.norm(g.params)) for g in scorers)
        w = cost_weights(PRIORS)
        covered, margins = 0, []
        for trial in range(100):
            u1, u2 = mixture_u_pair(SPEC, SamplePlan(500, 500, 0.9, 0.4, 10_000 + trial))
            est = np.array([empirical_risk_uu(g, u1, u2, PRIORS, SIGMOID).value for g in scorers])
            deviation = np.max(np.abs(est - truth))
            A1 = np.hstack([u1.features, np.ones((500, 1))])
            A2 = np.hstack([u2.features, np.ones((500, 1))])
            c_g = c_w * max(np.linalg.norm(A1, axis=1).max(), np.linalg.norm(A2, axis=1).max())
            consts = loss_constants(SIGMOID, c_g)
            bound = uniform_deviation_bound(BoundInputs(
                consts.l_ell, consts.c_ell, w.alpha, w.alpha_prime, 500, 500, 0.05,
                empirical_rademacher_linear(A1, c_w, 2000, trial).value,
                empirical_rademacher_linear(A2, c_w, 2000, trial).value,
            ))
            covered += deviation <= bound
            margins.append(bound - deviation)
        ok = covered >= 95
        assert acceptance(11, "bound validity", ok,
                          f"covered in {covered}/100 trials, min slack {min(margins):.3f}")

    def test_12_determinism(self, acceptance, tmp_path, capsys):
        doc = {"data": {"kind": "mixture", "pi": 0.3, "theta": 0.9, "theta_prime": 0.4,
                        "n": 300, "n_prime": 200, "n_test": 1000, "n_val": 100},
               "train": {"epochs": 20, "initial_lr": 0.05},
               "methods": ["uu", "ccn", "oracle_pn", "small_pn_prior_shift"],
               "sweep": {"theta_prime": [0.2, 0.5]},
               "seeds": [0, 1, 2]}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        outputs = []
        for run in ("a", "b"):
            for cmd in ("train", "baselines", "sweep-closeness"):
                assert cli_main([cmd, "--config", str(path), "--out", str(tmp_path / run)]) == 0
            capsys.readouterr()
            files = sorted(p.relative_to(tmp_path / run) for p in (tmp_path / run).rglob("result.json"))
            strip = lambda p: re.sub(rb'\n\s*"wall_clock_seconds": [^\n]*', b"", p.read_bytes())
            outputs.append({str(f): strip(tmp_path / run / f) for f in files})
        same = outputs[0] == outputs[1] and len(outputs[0]) == 7
        assert acceptance(12, "determinism", same,
                          f"{len(outputs[0])} result.json files byte-identical apart from wall clock: {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
