import os
from pathlib import Path

import pytest

CASE_DIR = Path(os.environ.get("GRIDQCQP_CASE_DIR", Path(__file__).resolve().parents[2] / "data" / "cases"))


@pytest.fixture(scope="session")
def case_dir():
    return CASE_DIR


@pytest.fixture(scope="session")
def case89():
    import gridqcqp

    return gridqcqp.load_case(CASE_DIR / "case89pegase.m")


TWO_BUS = """function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	380	1	1.1	0.9;
	2	1	100	30	0	0	1	1	0	380	1	1.1	0.9;
];
mpc.gen = [
	1	100	0	300	-300	1	100	1	500	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	0	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	2	1	0;
];
"""


@pytest.fixture
def two_bus_text():
    return TWO_BUS
