import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from gridflow import load_case, numeric

FIXTURES = Path(__file__).parent / "fixtures"

TWOBUS = """
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1.0 0.0 138 1 1.1 0.9;
    2 1 99.833 0 0 0 1 1.0 0.0 138 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 999 -999 1.0 100 1 999 0;
];
mpc.branch = [
    1 2 0 0.1 0 0 0 0 0 0 1 -360 360;
];
"""

PATH4 = """
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1.0 0.0 138 1 1.1 0.9;
    2 1 10 2 0 0 1 1.0 0.0 138 1 1.1 0.9;
    3 1 10 2 0 0 1 1.0 0.0 138 1 1.1 0.9;
    4 1 10 2 0 0 1 1.0 0.0 138 1 1.1 0.9;
];
mpc.gen = [
    1 0 0 999 -999 1.0 100 1 999 0;
];
mpc.branch = [
    1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360;
    2 3 0.01 0.1 0 0 0 0 0 0 1 -360 360;
    3 4 0.01 0.1 0 0 0 0 0 0 1 -360 360;
];
"""


@pytest.fixture(scope="session")
def case118_path() -> Path:
    return FIXTURES / "case118.m"


@pytest.fixture(scope="session")
def case118_graph(case118_path):
    return load_case(case118_path)


@pytest.fixture(scope="session")
def twobus_text() -> str:
    return TWOBUS


@pytest.fixture(scope="session")
def path4_text() -> str:
    return PATH4


@pytest.fixture(params=numeric.available_backends())
def backend(request):
    """Run a test once per available kernel backend."""
    with numeric.force_backend(request.param):
        yield request.param
