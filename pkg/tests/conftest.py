"""
Pytest configuration and fixtures for robust-linkage tests.
"""

import shutil
import tempfile
from pathlib import Path

import pytest

from robust_linkage.config import ClusteringConfig
from tests.fixtures import InstanceFixtures, InstanceTestData
from tests.utils.test_helpers import block_similarity


@pytest.fixture
def temp_dir():
    """Provide a temporary directory."""
    temp_dir = Path(tempfile.mkdtemp())
    yield temp_dir

    # Cleanup
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def config():
    """Provide a single-threaded default configuration."""
    return ClusteringConfig(threads=1)


@pytest.fixture
def two_blocks():
    """Provide two clusters of 20 points with similarity 0.9 inside and 0.1 across."""
    return block_similarity([20, 20])


@pytest.fixture
def three_blocks():
    """Provide three clusters of sizes 12, 10 and 8."""
    return block_similarity([12, 10, 8])


@pytest.fixture
def crossed_instance():
    """Provide the four-point instance where point 1 prefers the other cluster."""
    return InstanceTestData.crossed()


@pytest.fixture
def pairs_instance():
    """Provide the four-point instance of two tight pairs."""
    return InstanceTestData.pairs()


@pytest.fixture
def instance_files(temp_dir):
    """Provide an InstanceFixtures helper writing into the temporary directory."""
    fixtures = InstanceFixtures(base_path=temp_dir / "instances")
    yield fixtures
    fixtures.cleanup()
