import json
import math

import numpy as np
import pytest

from ascoding.cli import ENV_OUTPUT_DIR, main
from ascoding.datagen import load_dataset_csv, load_labels_csv
from ascoding.thermo import read_columns_csv


def run(*argv):
    return main([str(a) for a in argv])


def gen_args(out, sigma=0.5, n=8, seed=1):
    return ("gen", "--n", n, "--k-true", 2, "--sep", 6, "--sigma", sigma,
            "--seed", seed, "--balanced", "--out", out)


class TestGen:
    def test_writes_three_csvs(self, tmp_path):
        assert run(*gen_args(tmp_path / "g")) == 0
        for name in ("train.csv", "test.csv", "labels.csv", "manifest.json"):
            assert (tmp_path / "g" / name).exists()

    def test_outputs_roundtrip_through_parsers(self, tmp_path):
        run(*gen_args(tmp_path / "g"))
        train = load_dataset_csv(tmp_path / "g" / "train.csv")
        labels = load_labels_csv(tmp_path / "g" / "labels.csv")
        assert train.n == 8 and labels.n == 8

    def test_zero_sigma_train_equals_test(self, tmp_path):
        run(*gen_args(tmp_path / "g", sigma=0))
        a = (tmp_path / "g" / "train.csv").read_bytes()
        b = (tmp_path / "g" / "test.csv").read_bytes()
        assert a == b

    def test_rerun_byte_identical(self, tmp_path):
        out = tmp_path / "g"
        run(*gen_args(out))
        snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
        run(*gen_args(out))
        assert {p.name: p.read_bytes() for p in out.iterdir()} == snapshot

    def test_independent_mode_writes_second_labels(self, tmp_path):
        assert run(*gen_args(tmp_path / "g"), "--independent") == 0
        assert (tmp_path / "g" / "labels2.csv").exists()


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    run(*gen_args(out, sigma=0.8, n=8, seed=1))
    return out


class TestCapacity:
    def test_beta_grid_zero_only_analytic_point(self, dataset_dir, tmp_path):
        # single-row curve: info = H(type) - log k with the asymptotic option
        rc = run("capacity", "--train", dataset_dir / "train.csv",
                 "--test", dataset_dir / "test.csv", "--cost", "kmeans", "--k", 2,
                 "--engine", "exact", "--nsigma", "asymptotic", "--beta-grid", "0",
                 "--out", tmp_path / "cap")
        assert rc == 0
        cols = read_columns_csv(tmp_path / "cap" / "capacity.csv")
        assert cols["beta"].size == 1
        # balanced well-separated blobs: H = log 2, so info(0) = 0
        assert cols["info"][0] == pytest.approx(0.0, abs=1e-9)

    def test_noise_free_ceiling_near_log2(self, tmp_path):
        # identical samples, n=16 balanced: info_star within 0.05 of log 2
        out = tmp_path / "g16"
        run(*gen_args(out, sigma=0, n=16))
        rc = run("capacity", "--train", out / "train.csv", "--test", out / "test.csv",
                 "--cost", "kmeans", "--k", 2, "--engine", "exact",
                 "--nsigma", "asymptotic", "--out", tmp_path / "cap16")
        assert rc == 0
        summary = json.loads((tmp_path / "cap16" / "summary.json").read_text())
        assert abs(summary["info_star"] - math.log(2)) < 0.05

    def test_sampled_close_to_exact(self, dataset_dir, tmp_path):
        common = ("capacity", "--train", dataset_dir / "train.csv",
                  "--test", dataset_dir / "test.csv", "--cost", "kmeans", "--k", 2,
                  "--grid-points", 14, "--seed", 3)
        run(*common, "--engine", "exact", "--out", tmp_path / "e")
        cols = read_columns_csv(tmp_path / "e" / "capacity.csv")
        grid = ",".join(repr(float(b)) for b in cols["beta"])
        run(*common, "--engine", "sampled", "--beta-grid", grid,
            "--chains", 3, "--burnin", 40, "--sweeps", 250, "--out", tmp_path / "s")
        cols_s = read_columns_csv(tmp_path / "s" / "capacity.csv")
        assert np.abs(cols["info"] - cols_s["info"]).max() <= 0.1

    def test_rerun_byte_identical(self, dataset_dir, tmp_path):
        out = tmp_path / "cap"
        args = ("capacity", "--train", dataset_dir / "train.csv",
                "--test", dataset_dir / "test.csv", "--cost", "kmeans", "--k", 2,
                "--engine", "exact", "--out", out)
        run(*args)
        snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
        run(*args)
        assert {p.name: p.read_bytes() for p in out.iterdir()} == snapshot


class TestSelect:
    def test_two_blob_winner_k2(self, tmp_path):
        data = tmp_path / "d"
        run("gen", "--n", "10", "--k-true", "2", "--sep", "8", "--sigma", "1.0",
            "--seed", "0", "--balanced", "--out", data)
        rc = run("select", "--train", data / "train.csv", "--test", data / "test.csv",
                 "--cost", "kmeans", "--k", "1,2,3", "--engine", "exact",
                 "--grid-points", 20, "--out", tmp_path / "sel")
        assert rc == 0
        ranking = json.loads((tmp_path / "sel" / "ranking.json").read_text())
        assert ranking["ranking"][0]["candidate"]["k"] == 2
        assert not ranking["failures"]
        for entry in ranking["ranking"]:
            k = entry["candidate"]["k"]
            assert (tmp_path / "sel" / f"curve_kmeans_k{k}.csv").exists()

    def test_single_candidate(self, dataset_dir, tmp_path):
        rc = run("select", "--train", dataset_dir / "train.csv",
                 "--test", dataset_dir / "test.csv", "--cost", "kmeans", "--k", "2",
                 "--engine", "exact", "--out", tmp_path / "sel1")
        ranking = json.loads((tmp_path / "sel1" / "ranking.json").read_text())
        assert rc == 0 and len(ranking["ranking"]) == 1

    def test_duplicate_candidates_identical_scores(self, dataset_dir, tmp_path):
        rc = run("select", "--train", dataset_dir / "train.csv",
                 "--test", dataset_dir / "test.csv", "--cost", "kmeans,kmeans",
                 "--k", "2", "--engine", "exact", "--beta-grid", "0,0.3,1.0",
                 "--out", tmp_path / "dup")
        ranking = json.loads((tmp_path / "dup" / "ranking.json").read_text())
        assert rc == 0
        assert ranking["ranking"][0]["info_star"] == ranking["ranking"][1]["info_star"]


class TestSimulate:
    def test_zero_noise_zero_error(self, tmp_path):
        rc = run("simulate", "--n", 8, "--k-true", 2, "--sep", 6, "--sigma", 0,
                 "--balanced", "--cost", "kmeans", "--k", 2, "--gammas", "0",
                 "--codebook-sizes", "2,4", "--trials", 40, "--seed", 1,
                 "--out", tmp_path / "sim0")
        assert rc == 0
        summary = json.loads((tmp_path / "sim0" / "summary.json").read_text())
        assert all(g["p_hat"] == 0.0 for g in summary["grid"])

    def test_bound_consistency_on_output(self, tmp_path):
        rc = run("simulate", "--n", 8, "--k-true", 2, "--sep", 6, "--sigma", 1.0,
                 "--balanced", "--cost", "kmeans", "--k", 2, "--gammas", "0,2",
                 "--codebook-sizes", "4", "--trials", 80, "--seed", 1,
                 "--out", tmp_path / "sim")
        assert rc == 0
        summary = json.loads((tmp_path / "sim" / "summary.json").read_text())
        for g in summary["grid"]:
            half = 0.5 * (g["interval"][1] - g["interval"][0])
            assert g["bound"] >= g["p_hat"] - half

    def test_rerun_byte_identical(self, tmp_path):
        out = tmp_path / "sim"
        args = ("simulate", "--n", 6, "--k-true", 2, "--sep", 6, "--sigma", 1.0,
                "--balanced", "--cost", "kmeans", "--k", 2, "--gammas", "0",
                "--codebook-sizes", "2", "--trials", 25, "--seed", 1, "--out", out)
        run(*args)
        snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
        run(*args)
        assert {p.name: p.read_bytes() for p in out.iterdir()} == snapshot


class TestErrorPaths:
    def test_parse_error_exit_4(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nonsense\n")
        rc = run("capacity", "--train", bad, "--test", bad, "--k", 2,
                 "--out", tmp_path / "x")
        assert rc == 4

    def test_budget_error_exit_3(self, dataset_dir, tmp_path):
        rc = run("capacity", "--train", dataset_dir / "train.csv",
                 "--test", dataset_dir / "test.csv", "--k", 2, "--engine", "exact",
                 "--budget", 4, "--out", tmp_path / "x")
        assert rc == 3

    def test_config_error_exit_2(self, dataset_dir, tmp_path):
        rc = run("select", "--train", dataset_dir / "train.csv",
                 "--test", dataset_dir / "test.csv", "--cost", "kmeans", "--k", "",
                 "--out", tmp_path / "x")
        assert rc == 2

    def test_env_var_default_outdir(self, tmp_path, monkeypatch):
        target = tmp_path / "envout"
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(target))
        assert run("gen", "--n", 6, "--k-true", 2, "--sep", 6, "--sigma", 0.5,
                   "--seed", 1, "--balanced") == 0
        assert (target / "train.csv").exists()

    def test_missing_outdir_exit_2(self, tmp_path, monkeypatch):
        monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
        rc = run("gen", "--n", 6, "--k-true", 2, "--sep", 6, "--sigma", 0.5, "--seed", 1)
        assert rc == 2
