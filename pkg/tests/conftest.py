"""
Pytest configuration and fixtures for mdim_algebraic tests.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from mdim_algebraic.abelian import GroupPresentation, PresEndomorphism
from mdim_algebraic.cellular import CASpec
from mdim_algebraic.linalg import IntMatrix
from mdim_algebraic.trajectory import MeanRankParams

SPECS_DIR = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def specs_dir() -> Path:
    """Directory of the shipped example spec files."""
    return SPECS_DIR


@pytest.fixture
def small_params() -> MeanRankParams:
    """Budgets small enough for fast tests."""
    return MeanRankParams(max_n=12, max_window=2, stabilization_window=3)


@pytest.fixture
def unit_ca() -> CASpec:
    """The unit automaton on (T^1)^Z."""
    return CASpec.unit(1)


@pytest.fixture
def doubling_ca() -> CASpec:
    """x -> 2x on every coordinate of T^Z."""
    return CASpec.from_mapping(1, {0: [[2]]})


@pytest.fixture
def ledrappier_ca() -> CASpec:
    """F(x)_n = x_n + x_(n+1)."""
    return CASpec.from_mapping(1, {0: [[1]], 1: [[1]]})


@pytest.fixture
def mixed_ca() -> CASpec:
    """Two-term automaton on (T^2)^Z."""
    return CASpec.from_mapping(2, {0: [[1, 1], [0, 1]], 1: [[0, 1], [1, 0]]})


@pytest.fixture
def nilpotent_endo() -> PresEndomorphism:
    """A nilpotent endomorphism of Z^2."""
    return PresEndomorphism(GroupPresentation.free(2), IntMatrix.from_rows([[0, 1], [0, 0]]))


@pytest.fixture
def swap_endo() -> PresEndomorphism:
    """The coordinate swap on Z^2."""
    return PresEndomorphism(GroupPresentation.free(2), IntMatrix.from_rows([[0, 1], [1, 0]]))


@pytest.fixture
def torsion_group() -> GroupPresentation:
    """Z + Z/4."""
    return GroupPresentation.from_relation_columns(2, [[0, 4]])


@pytest.fixture
def ledrappier_spec_content() -> str:
    """Spec file content for the Ledrappier automaton."""
    return """kind = "cellular-automaton"
name = "ledrappier"

[automaton]
d = 1
support = [0, 1]

[automaton.coefficients]
"0" = [[1]]
"1" = [[1]]

[schedule]
max_n = 16
max_window = 2
"""


@pytest.fixture
def temp_dir(tmp_path: Path) -> Path:
    """Provide a temporary directory for file operations."""
    return tmp_path

