"""
Tests for experiment configuration, the command runners and the command line.

Run with:
    cd edgelab && pytest tests/test_experiments.py -v

The full-size runs are marked slow:
    EDGELAB_SLOW=1 pytest tests/test_experiments.py -v
"""
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from pydantic import ValidationError

import app
import experiments
from conftest import movielens_100k, slow, write_ratings
from errors import BoundViolationError, InvalidInputError
from experiments import load_config
from experiments.common import task_seed
from experiments.verify_bounds import chunk, make_bank_filter, random_eigenvalues, rotated_bases
from filters import FilterClass
from spectral import misalignment
from storage import read_csv

TINY_GRAPH = ["graph.n=8", "graph.communities=2"]
TINY_NET = ["net.layers=1", "net.features=1", "net.order=1"]
TINY_VERIFY = TINY_GRAPH + TINY_NET + [
    "verify.seeds=2", "verify.pert_sizes=0.001,0.01", "verify.eps_values=0,0.1", "verify.grid=101",
    "verify.compare_size=0.01",
]
TINY_TRAIN = TINY_GRAPH + [
    "net.layers=1", "net.features=2", "net.order=1",
    "train.sizes=20,4,6", "train.epochs=2", "train.realizations=2", "train.classes=conv,si",
    "train.pert_sizes=0,0.05", "train.batch_size=8",
]
TOY_RATINGS = [
    (1, 1, 5, 100), (1, 2, 4, 101), (1, 3, 1, 102),
    (2, 1, 3, 103), (2, 2, 2, 104), (2, 3, 2, 105),
    (3, 1, 4, 106), (3, 2, 5, 107),
    (4, 2, 1, 108), (4, 3, 5, 109),
]


def cli(tmp_path, command: str, overrides: list[str], *extra: str) -> int:
    argv = [command, "--out", str(tmp_path), "--quiet"]
    for override in overrides:
        argv += ["--set", override]
    return app.main(argv + list(extra))


def read_summary(tmp_path, command: str) -> dict:
    return json.loads((tmp_path / command / "summary.json").read_text())


class TestConfig:
    """Defaults, presets, files and overrides."""

    def test_defaults(self):
        config = load_config("verify-bounds")
        assert (config.graph.n, config.graph.communities) == (100, 10)
        assert (config.net.layers, config.net.features, config.net.order) == (2, 2, 3)
        assert config.verify.seeds == 100
        assert config.verify.pert_sizes[0] == 0.001

    def test_presets_apply_per_command(self):
        config = load_config("train-eval")
        assert (config.graph.n, config.graph.communities, config.net.features) == (50, 5, 8)
        assert load_config("sweep-hyper").train.realizations == 3

    def test_precedence(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nseed = 3\nnet.order = 2   # trailing\nverify.seeds = 7\n")
        config = load_config("verify-bounds", path, ["net.order=4"], seed=5, threads=None)
        assert config.net.order == 4
        assert config.seed == 5
        assert config.verify.seeds == 7

    def test_list_values(self):
        config = load_config("verify-bounds", overrides=["verify.eps_values=0, 0.3", "verify.classes=si,general"])
        assert config.verify.eps_values == [0.0, 0.3]
        assert config.verify.classes == ["si", "general"]

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            load_config("verify-bounds", overrides=["net.width=3"])

    def test_out_of_range_value_rejected(self):
        with pytest.raises(ValidationError):
            load_config("spectra", overrides=["spectra.eps=0.9"])

    def test_malformed_override(self):
        with pytest.raises(InvalidInputError):
            load_config("verify-bounds", overrides=["net.order"])

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(InvalidInputError):
            load_config("verify-bounds", tmp_path / "absent.cfg")

    def test_unknown_command(self):
        with pytest.raises(InvalidInputError, match="Available"):
            load_config("plot")

    def test_environment_defaults(self, monkeypatch):
        monkeypatch.setenv("EDGELAB_OUT_DIR", "elsewhere")
        monkeypatch.setenv("EDGELAB_THREADS", "3")
        config = load_config("spectra")
        assert str(config.output_path) == os.path.join("elsewhere", "spectra")
        assert config.threads == 3

    def test_resolved_text_reloads_identically(self, tmp_path, monkeypatch):
        monkeypatch.delenv("EDGELAB_MOVIELENS", raising=False)
        config = load_config("train-eval", overrides=["train.pert_sizes=0,0.5", "movielens.top_k=5"], seed=9)
        path = tmp_path / "resolved.cfg"
        path.write_text(config.to_text())
        assert load_config("train-eval", path) == config


class TestHelpers:
    """Seeds, chunks and filter-bank construction."""

    def test_task_seed_is_deterministic(self):
        assert task_seed(1, 2, 3) == task_seed(1, 2, 3)
        assert task_seed(1, 2, 3) != task_seed(1, 2, 4)

    def test_chunk_covers_items_in_stride(self):
        assert chunk(list(range(7)), 3) == [[0, 3, 6], [1, 4], [2, 5]]
        assert chunk([1, 2], 8) == [[1], [2]]

    def test_random_eigenvalues_are_normalized(self, rng):
        phi = random_eigenvalues(rng, 3, 10)
        assert phi.shape == (4, 10)
        assert np.allclose(np.abs(phi).sum(axis=0), 1.0)

    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.2, 0.5])
    def test_rotated_bases_hit_target_misalignment(self, sbm20, eps):
        bases = rotated_bases(sbm20, eps, 3)
        assert len(bases) == 4
        for basis in bases:
            assert misalignment(sbm20.eigenvectors, basis, match=True).epsilon == pytest.approx(eps, abs=1e-12)

    def test_shift_invariant_bank_filter_commutes_with_shift(self, sbm20, rng):
        phi = random_eigenvalues(rng, 3, sbm20.n)
        params = make_bank_filter(FilterClass.SHIFT_INVARIANT, sbm20, rotated_bases(sbm20, 0.1, 3), phi)
        assert params.class_tag is FilterClass.SHIFT_INVARIANT
        for matrix in params.matrices:
            assert np.linalg.norm(matrix @ sbm20.matrix - sbm20.matrix @ matrix) < 1e-10


class TestCommandLine:
    """Exit codes and outputs of every command at toy scale."""

    def test_verify_bounds(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", TINY_VERIFY) == app.EXIT_OK
        frame = read_csv(tmp_path / "verify-bounds" / "verify_bounds.csv")
        assert len(frame) == 2 * 2 * 3 * 2
        assert set(frame["class"]) == {"shift_invariant", "eigenvector_sharing", "general"}
        assert (frame["bound"] >= 0).all()
        summary = read_summary(tmp_path, "verify-bounds")
        assert summary["trials"] == len(frame)
        assert (tmp_path / "verify-bounds" / "plot_verify_bounds.py").exists()
        assert (tmp_path / "verify-bounds" / "config.resolved.txt").exists()

    def test_aligned_banks_share_constants(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", TINY_VERIFY) == app.EXIT_OK
        frame = read_csv(tmp_path / "verify-bounds" / "verify_bounds.csv")
        aligned = frame[frame["eps_target"] == 0]
        si = aligned[aligned["class"] == "shift_invariant"]["C_L"].to_numpy()
        es = aligned[aligned["class"] == "eigenvector_sharing"]["C_L"].to_numpy()
        assert np.array_equal(si, es)
        assert np.allclose(aligned[aligned["class"] == "eigenvector_sharing"]["eps_misalign"], 0.0, atol=1e-12)

    def test_strict_violation_exit_code(self, tmp_path, monkeypatch):
        def violating(config):
            raise BoundViolationError(3)
        monkeypatch.setitem(experiments.RUNNERS, "verify-bounds", violating)
        assert cli(tmp_path, "verify-bounds", TINY_VERIFY, "--strict") == app.EXIT_VIOLATION

    def test_invalid_value_exit_code(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", ["graph.n=0"]) == app.EXIT_INVALID

    def test_invalid_eps_exit_code(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", TINY_VERIFY + ["verify.eps_values=0.8"]) == app.EXIT_INVALID

    def test_unsupported_class_exit_code(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", TINY_VERIFY + ["verify.classes=conv"]) == app.EXIT_INVALID

    def test_spectra(self, tmp_path):
        assert cli(tmp_path, "spectra", TINY_GRAPH + ["spectra.order=2"]) == app.EXIT_OK
        out = tmp_path / "spectra"
        frame = read_csv(out / "spectra.csv")
        assert len(frame) == 4 * 8
        identity = frame[frame["filter"] == "identity"]
        assert np.allclose(identity["response"], 1.0) and np.allclose(identity["response_perturbed"], 1.0)
        assert frame["weyl_ok"].all()
        assert read_summary(tmp_path, "spectra")["weyl_failures"] == 0
        for name in ("misalignment.csv", "cross_matrix.csv", "graph.txt", "perturbation.txt"):
            assert (out / name).exists()

    def test_spectra_zero_perturbation_keeps_eigenvalues(self, tmp_path):
        assert cli(tmp_path, "spectra", TINY_GRAPH + ["spectra.pert_size=0"]) == app.EXIT_OK
        frame = read_csv(tmp_path / "spectra" / "spectra.csv")
        assert np.array_equal(frame["lambda"], frame["lambda_perturbed"])

    def test_train_eval(self, tmp_path):
        assert cli(tmp_path, "train-eval", TINY_TRAIN) == app.EXIT_OK
        out = tmp_path / "train-eval"
        frame = read_csv(out / "train_eval.csv")
        assert len(frame) == 2 * 2 * 2
        assert set(frame["class"]) == {"convolutional", "shift_invariant"}
        assert frame["metric"].between(0.0, 1.0).all()
        summary = read_csv(out / "train_eval_summary.csv")
        assert set(summary["over"]) == {"realization", "split"}
        assert read_summary(tmp_path, "train-eval")["metric"] == "accuracy"

    def test_train_eval_is_reproducible(self, tmp_path):
        assert cli(tmp_path / "a", "train-eval", TINY_TRAIN) == app.EXIT_OK
        assert cli(tmp_path / "b", "train-eval", TINY_TRAIN) == app.EXIT_OK
        first = read_csv(tmp_path / "a" / "train-eval" / "train_eval.csv")
        second = read_csv(tmp_path / "b" / "train-eval" / "train_eval.csv")
        assert first.equals(second)

    def test_sweep_hyper(self, tmp_path):
        overrides = TINY_TRAIN + ["train.classes=conv", "train.realizations=1", "sweep.param=order",
                                  "sweep.values=1,2"]
        assert cli(tmp_path, "sweep-hyper", overrides) == app.EXIT_OK
        frame = read_csv(tmp_path / "sweep-hyper" / "sweep_hyper.csv")
        assert frame["value"].tolist() == [1, 2]
        assert frame["n_params"].iloc[1] > frame["n_params"].iloc[0]
        assert set(read_summary(tmp_path, "sweep-hyper")["results"]["convolutional"]) == {"1", "2"}

    def test_ingest_movielens(self, tmp_path):
        ratings = write_ratings(tmp_path / "u.data", TOY_RATINGS)
        overrides = ["movielens.top_k=1", "movielens.test_fraction=0.25"]
        assert cli(tmp_path, "ingest-movielens", overrides, "--ratings", str(ratings)) == app.EXIT_OK
        out = tmp_path / "ingest-movielens"
        summary = read_summary(tmp_path, "ingest-movielens")
        assert (summary["n_users"], summary["n_items"], summary["target_item"]) == (4, 3, 2)
        assert summary["edges"] == 1
        assert summary["isolated_items"] == 1
        assert len(read_csv(out / "items.csv")) == 3
        assert (out / "movie_graph.txt").exists() and (out / "movielens_dataset.jsonl").exists()

    def test_ingest_needs_ratings(self, tmp_path, monkeypatch):
        monkeypatch.delenv("EDGELAB_MOVIELENS", raising=False)
        assert cli(tmp_path, "ingest-movielens", []) == app.EXIT_INVALID

    def test_unknown_target_exit_code(self, tmp_path):
        ratings = write_ratings(tmp_path / "u.data", TOY_RATINGS)
        assert cli(tmp_path, "ingest-movielens", ["movielens.target_item=9"], "--ratings", str(ratings)) \
            == app.EXIT_INVALID

    def test_config_file_flag(self, tmp_path):
        path = tmp_path / "spectra.cfg"
        path.write_text("\n".join(TINY_GRAPH).replace("=", " = ") + "\nspectra.pert_size = 0.01\n")
        assert cli(tmp_path, "spectra", [], "--config", str(path), "--seed", "4") == app.EXIT_OK
        resolved = (tmp_path / "spectra" / "config.resolved.txt").read_text()
        assert "seed = 4" in resolved
        assert "spectra.pert_size = 0.01" in resolved


class TestFullScale:
    """Full-size runs; minutes each."""

    @slow
    def test_bounds_hold_and_scale_linearly(self, tmp_path):
        assert cli(tmp_path, "verify-bounds", []) == app.EXIT_OK
        summary = read_summary(tmp_path, "verify-bounds")
        assert summary["first_order_violations"] == 0
        assert summary["bound_ordering"]["ordered"]
        for per_eps in summary["scaling"].values():
            for fit in per_eps.values():
                assert fit["r_squared"] >= 0.95

    @slow
    def test_thread_count_does_not_change_results(self, tmp_path):
        overrides = TINY_VERIFY + ["verify.seeds=8"]
        assert cli(tmp_path / "one", "verify-bounds", overrides, "--threads", "1") == app.EXIT_OK
        assert cli(tmp_path / "two", "verify-bounds", overrides, "--threads", "2") == app.EXIT_OK
        first = read_csv(tmp_path / "one" / "verify-bounds" / "verify_bounds.csv")
        second = read_csv(tmp_path / "two" / "verify-bounds" / "verify_bounds.csv")
        key = ["class", "eps_target", "pert_size", "trial"]
        first = first.sort_values(key).reset_index(drop=True)
        second = second.sort_values(key).reset_index(drop=True)
        assert first.equals(second)

    @slow
    def test_source_localization_accuracy(self, tmp_path):
        assert cli(tmp_path, "train-eval", []) == app.EXIT_OK
        frame = read_csv(tmp_path / "train-eval" / "train_eval.csv")
        conv = frame[(frame["class"] == "convolutional") & (frame["pert_size"] == 0)]
        assert conv["metric"].mean() >= 0.60
        trend = read_summary(tmp_path, "train-eval")["trend"]
        assert trend["convolutional"]["mean_rho"] < 0

    @slow
    @movielens_100k
    def test_movielens_beats_baseline(self, tmp_path):
        overrides = ["train.task=movielens", "train.classes=conv", "train.realizations=1",
                     "train.pert_sizes=0", "net.features=4", "net.order=2"]
        assert cli(tmp_path, "train-eval", overrides) == app.EXIT_OK
        frame = read_csv(tmp_path / "train-eval" / "train_eval.csv")
        conv = frame[frame["class"] == "convolutional"]["metric"].mean()
        baseline = frame[frame["class"] == "baseline"]["metric"].mean()
        assert math.isfinite(conv) and conv < baseline
