"""
Tests for inductive clustering from a sample.
"""

import numpy as np
import pytest

from robust_linkage.dendrogram import pruning_labeling
from robust_linkage.errors import LinkageError, ParamsTooLarge
from robust_linkage.evaluation import best_pruning_error
from robust_linkage.inductive import (
    AttributeOracle,
    MatrixOracle,
    evaluate_inductive,
    extend_labeling,
    fit_inductive,
    insert_point,
    required_sample_size,
    run_inductive,
)
from robust_linkage.models import AttributeTable, NoiseParams
from robust_linkage.rmnl import rmnl_cluster
from tests.utils.test_helpers import block_similarity


class TestRequiredSampleSize:
    """Test cases for required_sample_size."""

    def test_value(self):
        """Test the sample size formula."""
        assert required_sample_size(0.1, 0.1, 0.1, 12) == 553

    def test_monotone_in_delta(self):
        """Test a smaller failure probability needs more samples."""
        sizes = [required_sample_size(0.05, 0.1, delta, 12) for delta in (0.2, 0.1, 0.01)]

        assert sizes == sorted(sizes)
        assert sizes[0] < sizes[-1]

    def test_uses_smaller_fraction(self):
        """Test eta is the smaller of alpha and nu."""
        assert required_sample_size(0.05, 0.2, 0.1, 12) == required_sample_size(0.2, 0.05, 0.1, 12)

    def test_zero_fraction_rejected(self):
        """Test fractions must be strictly positive."""
        with pytest.raises(LinkageError):
            required_sample_size(0.0, 0.1, 0.1, 12)


class TestFitInductive:
    """Test cases for fit_inductive."""

    def test_full_sample_matches_direct_run(self, two_blocks, config):
        """Test sampling all of X gives the direct tree at doubled parameters."""
        sim, _ = two_blocks

        model = fit_inductive(MatrixOracle(sim), sim.n, sim.n, 0.005, 0.0, seed=0, config=config)

        assert model.n == sim.n
        assert model.sample_ids.tolist() == list(range(sim.n))
        assert model.tree.merges == rmnl_cluster(sim, NoiseParams(alpha=0.01), config).merges
        assert model.similarity_evaluations == sim.n**2

    def test_sample_deduplicated(self, config):
        """Test draws with replacement are reduced to distinct sorted ids."""
        sim, _ = block_similarity([100, 100])

        model = fit_inductive(MatrixOracle(sim), sim.n, 60, 0.01, 0.01, seed=3, config=config)

        ids = model.sample_ids.tolist()
        assert ids == sorted(set(ids))
        assert model.n <= 60
        assert model.draws == 60
        assert model.population == 200

    def test_params_too_large(self, two_blocks, config):
        """Test doubled parameters must fit the sample."""
        sim, _ = two_blocks

        with pytest.raises(ParamsTooLarge):
            fit_inductive(MatrixOracle(sim), sim.n, sim.n, 0.1, 0.0, seed=0, config=config)

    def test_insertion_size(self, two_blocks, config):
        """Test the insertion neighborhood uses the original parameters by default."""
        sim, _ = two_blocks

        model = fit_inductive(MatrixOracle(sim), sim.n, sim.n, 0.005, 0.0, seed=0, config=config)

        assert model.insertion_k == 2


class TestInsertion:
    """Test cases for insert_point and extend_labeling."""

    def test_descends_into_own_cluster(self, two_blocks, config):
        """Test a point's path passes through the node of its cluster."""
        sim, target = two_blocks
        model = fit_inductive(MatrixOracle(sim), sim.n, sim.n, 0.005, 0.0, seed=0, config=config)
        _, pruning = best_pruning_error(model.tree, target, 2)

        path = insert_point(model, sim.values[3])

        assert path[0] == model.tree.root
        assert model.tree.is_leaf(path[-1])
        assert pruning[0] in path
        assert pruning[1] not in path

    def test_root_pruning(self, two_blocks, config):
        """Test the root pruning puts every point in one cluster."""
        sim, _ = two_blocks
        oracle = MatrixOracle(sim)
        model = fit_inductive(oracle, sim.n, sim.n, 0.005, 0.0, seed=0, config=config)

        labeling = extend_labeling(model, oracle, [model.tree.root])

        assert labeling.labels.tolist() == [1] * sim.n

    def test_full_sample_matches_pruning(self, two_blocks, config):
        """Test with X equal to the sample the labeling is the pruning's clustering."""
        sim, target = two_blocks
        oracle = MatrixOracle(sim)
        model = fit_inductive(oracle, sim.n, sim.n, 0.005, 0.0, seed=0, config=config)
        _, pruning = best_pruning_error(model.tree, target, 2)

        labeling = extend_labeling(model, oracle, pruning)

        assert np.array_equal(labeling.labels, pruning_labeling(model.tree, pruning))

    def test_invalid_pruning(self, two_blocks, config):
        """Test the pruning must be valid for the sample tree."""
        sim, _ = two_blocks
        oracle = MatrixOracle(sim)
        model = fit_inductive(oracle, sim.n, sim.n, 0.005, 0.0, seed=0, config=config)

        with pytest.raises(LinkageError):
            extend_labeling(model, oracle, [0])


class TestRunInductive:
    """Test cases for the fit-and-extend protocol."""

    def test_similarity_budget(self, config):
        """Test the run evaluates only sample-by-sample and out-of-sample-by-sample similarities."""
        sim, target = block_similarity([100, 100])

        run, model, extended = run_inductive(MatrixOracle(sim), target, 60, 0.01, 0.01, seed=1, config=config)

        m = model.n
        assert run.similarity_evaluations == m * m + (200 - m) * m
        assert run.evaluated_fraction == pytest.approx(run.similarity_evaluations / 200**2)
        assert extended.n == 200

    def test_recovers_blocks(self, config):
        """Test the extended clustering is accurate on most seeds."""
        sim, target = block_similarity([100, 100])

        runs = evaluate_inductive(MatrixOracle(sim), target, 60, 0.01, 0.01, seeds=range(10), config=config)

        assert len(runs) == 10
        assert sum(run.extended_error <= 0.21 for run in runs) >= 8


class TestOracles:
    """Test cases for the similarity oracles."""

    def test_matrix_oracle_counts_calls(self):
        """Test every served similarity is counted."""
        sim, _ = block_similarity([3, 3])
        oracle = MatrixOracle(sim)

        oracle.block([0, 1], [2, 3, 4])
        values = oracle.block([0], [4])

        assert oracle.calls == 7
        assert values[0, 0] == pytest.approx(0.1)
        assert oracle.size == 6

    def test_attribute_oracle(self):
        """Test the attribute oracle serves the table's similarities."""
        table = AttributeTable(values=np.random.default_rng(2).normal(size=(6, 3)))
        oracle = AttributeOracle(table)

        block = oracle.block([0, 1], [2, 3, 4])

        assert np.allclose(block, table.similarity_block([0, 1], [2, 3, 4]))
        assert oracle.calls == 6
        assert oracle.size == 6
