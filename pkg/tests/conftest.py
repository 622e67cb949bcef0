from __future__ import annotations

import functools
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))


@functools.lru_cache(maxsize=None)
def datum(name: str):
    from kintegral.orbifold_data import load_datum
    return load_datum(FIXTURES / f"{name}.json")


@functools.lru_cache(maxsize=None)
def table(spec: str, name: str):
    from kintegral.qdm import load_table
    return load_table(FIXTURES / f"{name}.json", datum(spec))


@functools.lru_cache(maxsize=None)
def solutions(spec: str, tname: str, order: int, directions: tuple | None = None):
    """(qp, L, L~) for a fixture pair; L~ is None on compact data."""
    from kintegral.qdm import DubrovinConnection, FundamentalSolution, QuantumProduct
    d = datum(spec)
    qp = QuantumProduct(table(spec, tname), d, order, directions=None if directions is None else list(directions))
    L = FundamentalSolution(DubrovinConnection(qp))
    Lt = None if d.compact else FundamentalSolution(DubrovinConnection(qp, dual=True))
    return qp, L, Lt


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
