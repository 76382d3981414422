import csv
import json
import os

import pytest

from app.config.settings import ARTIFACT_VERSION, REPORT_SCHEMA
from app.models.models import ExperimentConfig
from app.modules.experiments.experiments import DEFAULT_BUDGETS, EXPERIMENTS, resolve_config, run_experiment
from app.modules.exporter.report_exporter import ReportExporter, config_hash
from app.utils.validators import ValidationError

SMALL_PARAMS = {
    "bmv-fuzz": {"trials": 20, "k_max": 20},
    "lemma24": {"trials": 5, "dims": [1], "eps_list": [0.2], "k_max": 6},
    "snf-suite": {"trials": 10, "max_dim": 3, "samples": 10, "q_max": 50},
    "span-stabilization": {"trials": 10, "max_dim": 3, "max_generators": 2, "identity_samples": 3},
    "walk-decay": {"q_list": [1, 2, 3], "n_max": 30, "tail": 5, "samples": 4000, "compare_n": 4},
    "thmC": {"k": 3, "trials": 2, "target": 0.0},
    "glasner1d": {"k": 40, "eps": 0.3, "trials": 2, "target": 0.0, "denominator": 10_007},
    "prop16": {"k": 5, "trials": 2, "target": 0.0},
}

SMALL_BUDGETS = {"n_max": 200, "ball_radius": 3, "element_budget": 200}


def _config(name, tmp_path, seed=7, **overrides):
    return ExperimentConfig(
        experiment=name,
        seed=seed,
        params=overrides.pop("params", SMALL_PARAMS.get(name, {})),
        budgets=overrides.pop("budgets", SMALL_BUDGETS),
        output_dir=str(tmp_path),
        **overrides,
    )


def _read_metadata(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    assert first.startswith("# ")
    return json.loads(first[2:])


def test_registry_names():
    assert set(EXPERIMENTS) == {
        "glasner1d", "prop16", "thmC", "walk-decay", "bmv-fuzz", "hq-scaling",
        "lemma24", "snf-suite", "span-stabilization", "gauss-hua",
    }


def test_resolve_config_merges_defaults(tmp_path):
    config = resolve_config(_config("glasner1d", tmp_path, eps=0.2))
    assert config.params["eps"] == 0.2
    assert config.eps == 0.2
    assert config.params["k"] == 40
    assert config.budgets["n_max"] == 200
    assert config.budgets["max_refinements"] == DEFAULT_BUDGETS["max_refinements"]


def test_unknown_experiment_is_rejected(tmp_path):
    with pytest.raises(ValidationError):
        run_experiment(ExperimentConfig(experiment="nope", seed=1, output_dir=str(tmp_path)))


def test_config_hash_is_canonical(tmp_path):
    a = _config("bmv-fuzz", tmp_path)
    b = _config("bmv-fuzz", tmp_path / "other", threads=4)
    c = _config("bmv-fuzz", tmp_path, seed=8)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 64


def test_exporter_writes_metadata_header(tmp_path):
    config = _config("bmv-fuzz", tmp_path)
    exporter = ReportExporter(config)
    path = exporter.write_table(("a", "b"), [(1, 2), (3, 4)], table="extra")
    assert os.path.basename(path) == "bmv-fuzz_extra.csv"
    meta = _read_metadata(path)
    assert meta["schema"] == REPORT_SCHEMA
    assert meta["artifact_version"] == ARTIFACT_VERSION
    assert meta["seed"] == 7
    assert meta["config_hash"] == config_hash(config)
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    assert rows == [["a", "b"], ["1", "2"], ["3", "4"]]

    report = exporter.write_summary({"x": 1}, passed=True)
    assert report.files == [path, str(tmp_path / "bmv-fuzz.json")]
    with open(tmp_path / "bmv-fuzz.json", encoding="utf-8") as fh:
        document = json.load(fh)
    assert document["schema"] == REPORT_SCHEMA
    assert document["summary"] == {"x": 1}
    assert document["config"]["seed"] == 7


@pytest.mark.parametrize("name", ["bmv-fuzz", "lemma24", "snf-suite", "span-stabilization"])
def test_certificate_experiments_pass(name, tmp_path):
    report = run_experiment(_config(name, tmp_path))
    assert report.passed
    assert report.experiment == name
    assert all(os.path.exists(f) for f in report.files)


def test_bmv_fuzz_has_no_violations(tmp_path):
    report = run_experiment(_config("bmv-fuzz", tmp_path))
    assert report.summary == {"trials": 20, "violations": 0}


def test_walk_decay_small_family(tmp_path):
    report = run_experiment(_config("walk-decay", tmp_path))
    plateaus = report.summary["plateaus"]
    assert plateaus["1"] == pytest.approx(1.0)
    assert plateaus["2"] == pytest.approx(1 / 3, abs=1e-4)
    assert report.summary["monotone"]
    assert report.passed
    assert os.path.exists(tmp_path / "walk-decay_profile.csv")


def test_gauss_hua_small_primes(tmp_path):
    params = {"q_max": 31, "samples": 3, "hua_D": 2, "hua_trials": 3, "weyl_N": 20_000}
    report = run_experiment(_config("gauss-hua", tmp_path, params=params))
    assert report.summary["failures"] == 0
    assert report.summary["primes"] == 10
    assert report.summary["weyl_quadratic_abs"] < 0.05


def test_hq_scaling_writes_histogram(tmp_path):
    params = {"ks": [8, 16, 32], "dims": [1], "families": ["grid"]}
    report = run_experiment(_config("hq-scaling", tmp_path, params=params))
    assert set(report.summary["fits"]) == {"grid/d=1"}
    assert os.path.exists(tmp_path / "hq-scaling_histogram.csv")


@pytest.mark.parametrize("name", ["thmC", "glasner1d", "prop16"])
def test_search_experiments_run_at_small_scale(name, tmp_path):
    report = run_experiment(_config(name, tmp_path))
    assert report.summary["trials"] == 2
    assert report.passed
    if name == "thmC":
        assert report.summary["R"] == 2 and report.summary["N"] == 4
        assert all(report.summary["evaluations"].values())


def test_experiments_are_deterministic(tmp_path):
    first = run_experiment(_config("snf-suite", tmp_path / "a"))
    second = run_experiment(_config("snf-suite", tmp_path / "b"))
    assert first.summary == second.summary
    assert first.config_hash == second.config_hash
    with open(first.files[0], encoding="utf-8") as fa, open(second.files[0], encoding="utf-8") as fb:
        assert fa.read() == fb.read()
