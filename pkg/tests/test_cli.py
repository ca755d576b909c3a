import csv
import json

import pytest

from uulearn.cli import EXIT_ABORTED, EXIT_CONFIG, EXIT_OK, main

CONFIG = {
    "data": {"kind": "mixture", "pi": 0.3, "theta": 0.9, "theta_prime": 0.4, "n": 200, "n_prime": 100,
             "n_test": 500},
    "train": {"epochs": 3, "initial_lr": 0.05},
    "seeds": [0, 1],
    "methods": ["uu", "oracle_pn"],
    "sweep": {"theta_prime": [0.1, 0.3], "eps_pairs": [[1.0, 1.0], [0.9, 1.1]], "n": [50, 100]},
}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(CONFIG))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


class TestCommands:
    def test_rewrite_check(self, capsys):
        code, out = run(capsys, "rewrite-check", "--pi", 0.3, "--theta", 0.9, "--theta-prime", 0.4)
        doc = json.loads(out.out)
        assert code == EXIT_OK
        assert doc["coefficients"] == pytest.approx({"a": 0.36, "b": -0.56, "c": 1.26, "d": -0.06})
        assert doc["reduction"] == "General" and doc["single_set"]["feasible"] is False

    def test_rewrite_check_from_config(self, capsys, config):
        code, out = run(capsys, "rewrite-check", "--config", config)
        assert code == EXIT_OK and json.loads(out.out)["priors"]["theta"] == 0.9

    def test_gen_train_eval(self, capsys, tmp_path, config):
        assert run(capsys, "gen", "--config", config, "--out", tmp_path / "data")[0] == EXIT_OK
        for name in ("u1.csv", "u2.csv", "test.csv", "pool.csv"):
            assert (tmp_path / "data" / name).exists()
        code, out = run(capsys, "train", "--config", config, "--out", tmp_path / "runs", "--seed", 1)
        assert code == EXIT_OK and json.loads(out.out)["test_errors"]
        model = tmp_path / "runs" / "uu" / "seed_1" / "model.json"
        code, out = run(capsys, "eval", "--model", model, "--test", tmp_path / "data" / "test.csv")
        assert code == EXIT_OK and json.loads(out.out)["kind"] == "zero_one_error"
        code, out = run(capsys, "eval", "--model", model, "--u1", tmp_path / "data" / "u1.csv",
                        "--u2", tmp_path / "data" / "u2.csv", "--pi", 0.3, "--theta", 0.9, "--theta-prime", 0.4,
                        "--estimator", "uu_sym")
        doc = json.loads(out.out)
        assert code == EXIT_OK and doc["kind"] == "uu_sym" and (doc["n"], doc["n_prime"]) == (200, 100)

    def test_bound(self, capsys):
        code, out = run(capsys, "bound", "--pi", 0.3, "--theta", 0.9, "--theta-prime", 0.4, "--n", 400,
                        "--n-prime", 100, "--rad-n", 0.0, "--rad-n-prime", 0.0, "--delta", 0.05)
        doc = json.loads(out.out)
        assert code == EXIT_OK
        assert set(doc["estimation_error"]) == {"complexity_term", "complexity_term_prime", "deviation_term", "total"}
        assert doc["estimation_error"]["total"] == pytest.approx(2 * doc["uniform_deviation"]["total"])

    @pytest.mark.parametrize("cmd,name", [("sweep-closeness", "closeness"), ("sweep-robustness", "robustness"),
                                          ("sweep-sizes", "sizes"), ("baselines", "baselines")])
    def test_sweeps_write_summary(self, capsys, tmp_path, config, cmd, name):
        code, _ = run(capsys, cmd, "--config", config, "--out", tmp_path)
        assert code == EXIT_OK
        rows = list(csv.DictReader(open(tmp_path / name / "summary.csv")))
        assert len(rows) == 2 and all(r["error"] == "" for r in rows)
        for r in rows:
            assert (tmp_path / name / r["label"] / "result.json").exists()


class TestExitCodes:
    def test_config_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({**CONFIG, "data": {**CONFIG["data"], "theta_prime": 0.9}}))
        code, out = run(capsys, "train", "--config", bad)
        assert code == EXIT_CONFIG and "coincide" in out.err

    def test_missing_config(self, capsys):
        assert run(capsys, "train")[0] == EXIT_CONFIG
        assert run(capsys, "rewrite-check", "--pi", 0.3)[0] == EXIT_CONFIG

    def test_zero_one_bound_refused(self, capsys):
        code, _ = run(capsys, "bound", "--pi", 0.3, "--theta", 0.9, "--theta-prime", 0.4, "--loss", "zero-one",
                      "--n", 10, "--n-prime", 10, "--rad-n", 0.1, "--rad-n-prime", 0.1)
        assert code == EXIT_CONFIG

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_aborted_run(self, capsys, tmp_path):
        path = tmp_path / "diverge.json"
        path.write_text(json.dumps({**CONFIG, "train": {"epochs": 5, "initial_lr": 1e306, "loss": "logistic"}}))
        code, out = run(capsys, "train", "--config", path, "--out", tmp_path)
        assert code == EXIT_ABORTED and "aborted" in out.err
