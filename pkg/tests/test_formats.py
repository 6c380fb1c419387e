"""
Tests for the text file formats.
"""

import numpy as np
import pytest

from robust_linkage.errors import AsymmetryError, ErrorCode, LinkageError, ParseError
from robust_linkage.evaluation import ErrorTable
from robust_linkage.formats import (
    Provenance,
    read_error_table,
    read_labeling,
    read_point_set,
    read_provenance,
    read_similarity,
    read_subsets,
    read_table,
    read_tree,
    write_error_table,
    write_similarity,
    write_table,
    write_tree,
)
from robust_linkage.models import AttributeTable
from tests.test_dendrogram import small_tree
from tests.utils.test_helpers import random_similarity


class TestSimilarityFiles:
    """Test cases for similarity matrix files."""

    def test_exact_round_trip(self, temp_dir):
        """Test values survive writing and reading bit for bit."""
        sim = random_similarity(6, seed=12)
        path = temp_dir / "sim.txt"

        write_similarity(path, sim, Provenance(command="generate", seed=12, params={"n": 6}))
        loaded = read_similarity(path)

        assert np.array_equal(loaded.values, sim.values)

    def test_provenance(self, temp_dir):
        """Test provenance lines are written and read back."""
        path = temp_dir / "sim.txt"
        write_similarity(path, random_similarity(3, seed=1), Provenance(command="generate planted", seed=5, params={"alpha": 0.1}))

        provenance = read_provenance(path)

        assert provenance.command == "generate planted"
        assert provenance.seed == 5
        assert provenance.params == {"alpha": 0.1}
        assert provenance.prng == "PCG64"
        assert provenance.format_version == "1"

    def test_parse_error_location(self, instance_files):
        """Test a malformed value is reported with its line and column."""
        path = instance_files.write_matrix_text("bad.txt", "# format_version=1\nn=2\n1,0.5\n0.5,x\n")

        with pytest.raises(ParseError) as excinfo:
            read_similarity(path)

        assert excinfo.value.line == 4
        assert excinfo.value.column == 5

    def test_wrong_row_count(self, instance_files):
        """Test a missing row is reported."""
        path = instance_files.write_matrix_text("short.txt", "n=3\n1,0,0\n0,1,0\n")

        with pytest.raises(ParseError, match="expected 3 data rows"):
            read_similarity(path)

    def test_missing_header(self, instance_files):
        """Test the size header is required."""
        path = instance_files.write_matrix_text("noheader.txt", "1,0\n0,1\n")

        with pytest.raises(ParseError, match="header"):
            read_similarity(path)

    def test_asymmetric_file(self, instance_files):
        """Test the first asymmetric pair is reported."""
        path = instance_files.write_matrix_text("asym.txt", "n=3\n1,0.2,0.3\n0.25,1,0.4\n0.3,0.4,1\n")

        with pytest.raises(AsymmetryError) as excinfo:
            read_similarity(path)

        assert excinfo.value.pair == (0, 1)

    def test_missing_file(self, temp_dir):
        """Test a missing file has its own error code."""
        with pytest.raises(LinkageError) as excinfo:
            read_similarity(temp_dir / "absent.txt")

        assert excinfo.value.error_code == ErrorCode.FILE_NOT_FOUND


class TestTreeFiles:
    """Test cases for merge tree files."""

    def test_round_trip(self, temp_dir):
        """Test a multiway tree with integer thresholds is read back unchanged."""
        tree = small_tree()
        path = temp_dir / "tree.txt"

        write_tree(path, tree)
        loaded = read_tree(path)

        assert loaded.merges == tree.merges
        assert loaded.algorithm == "test"
        assert "2,7,5;6,3" in path.read_text(encoding="utf-8")

    def test_invalid_tree(self, instance_files):
        """Test merges that do not form a tree are rejected."""
        path = instance_files.write_matrix_text("tree.txt", "n=3\n0,3,0;1,1\n")

        with pytest.raises(ParseError, match="exactly one root"):
            read_tree(path)

    def test_bad_children(self, instance_files):
        """Test a non-integer child id is located."""
        path = instance_files.write_matrix_text("tree.txt", "n=2\n0,2,0;a,1\n")

        with pytest.raises(ParseError) as excinfo:
            read_tree(path)

        assert excinfo.value.line == 2
        assert excinfo.value.column == 5


class TestOtherFiles:
    """Test cases for labelings, point sets, subsets, tables and error tables."""

    def test_block_instance_files(self, instance_files):
        """Test the files written for a block instance."""
        paths = instance_files.write_blocks([3, 2])

        assert read_labeling(paths["target"]).labels.tolist() == [1, 1, 1, 2, 2]
        assert read_point_set(paths["bad"]) == []
        assert read_subsets(paths["subsets"])[4] == [3, 4]
        assert read_similarity(paths["similarity"]).n == 5

    def test_labeling_parse_error(self, instance_files):
        """Test a malformed label is located."""
        path = instance_files.write_matrix_text("labels.txt", "k=2\n1\ntwo\n")

        with pytest.raises(ParseError) as excinfo:
            read_labeling(path)

        assert excinfo.value.line == 3

    def test_table_round_trip(self, temp_dir):
        """Test attribute tables keep full precision."""
        table = AttributeTable(values=np.random.default_rng(3).normal(size=(4, 2)))
        path = temp_dir / "table.txt"

        write_table(path, table)

        assert np.array_equal(read_table(path).values, table.values)

    def test_ragged_table(self, instance_files):
        """Test rows of different lengths are rejected."""
        path = instance_files.write_matrix_text("table.txt", "rows=2\n1,2\n3\n")

        with pytest.raises(ParseError, match="different lengths"):
            read_table(path)

    def test_error_table(self, temp_dir):
        """Test error tables keep their columns and rows."""
        table = ErrorTable(columns=["level", "rmnl", "single"], rows=[[0.0, 0.0, 0.25], [0.5, 0.125, 0.5]])
        path = temp_dir / "errors.csv"

        write_error_table(path, table)

        assert read_error_table(path) == table
