"""
Tests for the plain-text persistence layer.

Run with:
    cd edgelab && pytest tests/test_storage.py -v
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from datagen import DatasetSplit, LabeledSample
from edgenet import EdgeNet, EdgeNetConfig
from errors import InvalidInputError
from filters import make_convolutional, make_general, make_node_varying
from perturb import sample_perturbation
from storage import (
    load_checkpoint,
    load_dataset,
    load_filter,
    load_graph,
    load_perturbation,
    read_csv,
    save_checkpoint,
    save_dataset,
    save_filter,
    save_graph,
    save_perturbation,
    write_csv,
    write_plot_script,
)


class TestGraphFiles:
    """Edge-list files."""

    def test_weights_survive_exactly(self, sbm20, tmp_path):
        path = tmp_path / "graph.txt"
        save_graph(sbm20, path)
        assert np.array_equal(load_graph(path).matrix, sbm20.matrix)

    def test_header_counts_edges(self, small_sbm, tmp_path):
        path = tmp_path / "graph.txt"
        save_graph(small_sbm, path)
        n, m = (int(token) for token in path.read_text().splitlines()[0].split())
        assert n == small_sbm.n
        assert m == np.count_nonzero(np.triu(small_sbm.matrix))

    def test_edge_count_mismatch(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("3 2\n0 1 0.5\n")
        with pytest.raises(InvalidInputError):
            load_graph(path)

    def test_edge_outside_range(self, tmp_path):
        path = tmp_path / "graph.txt"
        path.write_text("2 1\n0 5 0.5\n")
        with pytest.raises(InvalidInputError):
            load_graph(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError):
            load_graph(tmp_path / "absent.txt")


class TestFilterFiles:
    """Filter blocks of every layout."""

    def test_convolutional(self, tmp_path):
        params = make_convolutional([0.1, -0.25, 1 / 3], 5)
        save_filter(params, tmp_path / "conv.txt")
        loaded = load_filter(tmp_path / "conv.txt")
        assert loaded.class_tag is params.class_tag
        assert np.array_equal(loaded.matrices, params.matrices)

    def test_node_varying(self, rng, tmp_path):
        params = make_node_varying(rng.normal(size=(2, 6)))
        save_filter(params, tmp_path / "nv.txt")
        assert np.array_equal(load_filter(tmp_path / "nv.txt").matrices, params.matrices)

    def test_general(self, sbm20, rng, tmp_path):
        params = make_general(rng.normal(size=(3, sbm20.n, sbm20.n)), sbm20.support)
        save_filter(params, tmp_path / "general.txt")
        assert np.array_equal(load_filter(tmp_path / "general.txt").matrices, params.matrices)

    def test_non_numeric_entry(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 1 convolutional\n0.5 abc\n")
        with pytest.raises(InvalidInputError):
            load_filter(path)


class TestPerturbationFiles:

    def test_matrix_and_metadata(self, sbm20, tmp_path):
        perturbation = sample_perturbation(sbm20.n, 0.05, "support-respecting", seed=4, operator=sbm20)
        save_perturbation(perturbation, tmp_path / "perturbation.txt")
        loaded = load_perturbation(tmp_path / "perturbation.txt")
        assert np.array_equal(loaded.matrix, perturbation.matrix)
        assert (loaded.size, loaded.mode, loaded.seed) == (0.05, perturbation.mode, 4)


class TestCheckpoints:
    """Trained networks written and reloaded on their graph."""

    @pytest.mark.parametrize("class_tag", ["conv", "nv", "es", "si", "general"])
    def test_outputs_survive(self, small_sbm, rng, tmp_path, class_tag):
        net = EdgeNet(EdgeNetConfig(layers=2, features=2, order=2, outputs=3, class_tag=class_tag), small_sbm)
        save_checkpoint(net, tmp_path / "net.txt")
        loaded = load_checkpoint(tmp_path / "net.txt", small_sbm)
        x = rng.normal(size=(4, small_sbm.n))
        assert loaded.config == net.config
        assert np.allclose(loaded.forward(x), net.forward(x), atol=1e-12)

    def test_filter_bank_network(self, small_sbm, rng, tmp_path):
        config = EdgeNetConfig(layers=1, features=1, order=1, class_tag="si")
        net = EdgeNet.from_filter_bank(config, small_sbm, [[[make_convolutional([0.5, 0.5], small_sbm.n)]]])
        save_checkpoint(net, tmp_path / "bank.txt")
        loaded = load_checkpoint(tmp_path / "bank.txt", small_sbm)
        assert loaded.parameterization.name == "fixed_bank"
        x = rng.normal(size=small_sbm.n)
        assert np.allclose(loaded.forward(x), net.forward(x), atol=1e-12)


class TestDatasetFiles:

    def test_samples_and_missing_labels(self, tmp_path):
        split = DatasetSplit(
            train=[LabeledSample(np.array([0.1, 0.2]), 1, {"t": 3})],
            validation=[],
            test=[LabeledSample(np.array([1 / 3, 0.0]), float("nan"))],
            seed=7,
            kind="toy",
            params={"n": 2},
        )
        save_dataset(split, tmp_path / "data.jsonl")
        loaded = load_dataset(tmp_path / "data.jsonl")
        assert loaded.sizes() == split.sizes()
        assert (loaded.seed, loaded.kind, loaded.params) == (7, "toy", {"n": 2})
        assert loaded.train[0].label == 1 and loaded.train[0].meta == {"t": 3}
        assert np.array_equal(loaded.test[0].signal, split.test[0].signal)
        assert not loaded.test[0].has_label()

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.jsonl"
        path.write_text('{"format": "something-else"}\n')
        with pytest.raises(InvalidInputError):
            load_dataset(path)


class TestOutputs:
    """Result CSVs and plot scripts."""

    def test_csv_has_schema_line(self, tmp_path):
        path = write_csv([{"class": "si", "empirical": 0.5}], tmp_path / "out" / "results.csv", "verify-bounds")
        assert path.read_text().splitlines()[0] == "# edgelab verify-bounds schema v1"
        frame = read_csv(path)
        assert frame.to_dict("records") == [{"class": "si", "empirical": 0.5}]

    def test_plot_script_points_at_csv(self, tmp_path):
        script = write_plot_script(tmp_path / "plot_results.py", "results.csv", "train-eval").read_text()
        assert '"results.csv"' in script
        assert "results.png" in script
        compile(script, "plot_results.py", "exec")

    def test_unknown_plot_kind(self, tmp_path):
        with pytest.raises(InvalidInputError, match="Available"):
            write_plot_script(tmp_path / "plot.py", "results.csv", "histogram")
