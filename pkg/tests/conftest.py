"""Test configuration and fixtures for pytest."""
import random
import shutil
from pathlib import Path

import pytest
import yaml

from core.config import DEFAULT_TABLE_DIR, config_manager


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the environment configuration."""
    config_manager.reset()
    yield
    config_manager.reset()


@pytest.fixture
def rng():
    """Seeded generator for randomized checks."""
    return random.Random(20240611)


@pytest.fixture
def table_copy(tmp_path):
    """A writable copy of the shipped tables."""
    target = tmp_path / "tables"
    shutil.copytree(DEFAULT_TABLE_DIR, target)
    return target


@pytest.fixture
def write_problem(tmp_path):
    """Write a problem mapping to a YAML file and return its path."""

    def _write(problem: dict, name: str = "problem.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(problem), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def cp2_pair_problem():
    return {"n": 2, "k": 2, "inverse": [[1, 0], [0, -1]], "pair": {"mu": [1, 1], "delta": "eta2"}}


@pytest.fixture
def odd_n4_problem():
    return {"n": 4, "k": 3, "inverse": [[1, 0, 0], [0, 1, 0], [0, 0, -1]], "torsion": [0, 1, 2]}


@pytest.fixture
def large_k_problem():
    return {
        "n": 10,
        "k": 2,
        "inverse": [[1, 0], [0, -1]],
        "primes": [2],
        "regime": "large_k",
        "stable_model": {"unstable_factors": [3], "stable_factors": [3], "suspension": [[1]]},
        "stable_coordinates": [[1], [2]],
    }
