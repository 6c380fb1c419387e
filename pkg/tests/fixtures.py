"""
Test fixtures and utilities for robust-linkage tests.

This module provides small hand-built instances and a helper that writes
instance files for command-line tests.
"""

import shutil
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from robust_linkage.formats import write_labeling, write_point_set, write_similarity, write_subsets
from robust_linkage.models import Labeling, SimilarityMatrix
from tests.utils.test_helpers import block_similarity


class InstanceTestData:
    """Tiny instances with known answers."""

    # Four points: {0, 1} and {2, 3}, but point 1 is closer to 2 than to 0
    CROSSED = [
        [1.0, 0.8, 0.1, 0.0],
        [0.8, 1.0, 0.9, 0.2],
        [0.1, 0.9, 1.0, 0.7],
        [0.0, 0.2, 0.7, 1.0],
    ]
    CROSSED_LABELS = [1, 1, 2, 2]

    # Two tight pairs far apart
    PAIRS = [
        [1.0, 0.9, 0.1, 0.2],
        [0.9, 1.0, 0.2, 0.1],
        [0.1, 0.2, 1.0, 0.8],
        [0.2, 0.1, 0.8, 1.0],
    ]
    PAIRS_LABELS = [1, 1, 2, 2]

    @classmethod
    def crossed(cls) -> tuple:
        """The crossed instance and its target."""
        return SimilarityMatrix(values=cls.CROSSED), Labeling(labels=cls.CROSSED_LABELS, k=2)

    @classmethod
    def pairs(cls) -> tuple:
        """The two-pairs instance and its target."""
        return SimilarityMatrix(values=cls.PAIRS), Labeling(labels=cls.PAIRS_LABELS, k=2)


class InstanceFixtures:
    """Writes instance files into a scratch directory."""

    def __init__(self, base_path: Optional[Path] = None):
        self.base_path = base_path or Path(tempfile.mkdtemp())
        self.base_path.mkdir(parents=True, exist_ok=True)

    def write_blocks(self, sizes: List[int], name: str = "blocks") -> Dict[str, Path]:
        """Write a block instance with its target, an empty bad set and the cluster subset family."""
        sim, target = block_similarity(sizes)
        folder = self.base_path / name
        paths = {
            "similarity": folder / "similarity.txt",
            "target": folder / "target.txt",
            "bad": folder / "bad.txt",
            "subsets": folder / "subsets.txt",
        }
        write_similarity(paths["similarity"], sim)
        write_labeling(paths["target"], target)
        write_point_set(paths["bad"], [])
        family = {p: members.tolist() for members in target.clusters() for p in members.tolist()}
        write_subsets(paths["subsets"], sim.n, family)
        return paths

    def write_matrix_text(self, name: str, text: str) -> Path:
        """Write raw text, for malformed-input tests."""
        path = self.base_path / name
        path.write_text(text, encoding="utf-8")
        return path

    def cleanup(self) -> None:
        """Remove the scratch directory."""
        shutil.rmtree(self.base_path, ignore_errors=True)


def asymmetric_values(n: int = 4) -> np.ndarray:
    """Identity matrix with a single asymmetric entry at (1, 2)."""
    values = np.eye(n)
    values[1, 2] = 0.5
    return values
