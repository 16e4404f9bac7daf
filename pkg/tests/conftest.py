import math

import pytest
from hypothesis import settings

from dehnfill.census import builtin_table3, find_record
from dehnfill.core import ComplexVal, CuspShape, NZCoefficients

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

SQRT3 = math.sqrt(3)
SQRT7 = math.sqrt(7)


@pytest.fixture(scope="session")
def table3():
    return builtin_table3()


@pytest.fixture(scope="session")
def nz_of(table3):
    def get(name):
        return find_record(table3, name).nz

    return get


def m004_nz():
    # written out independently of the data file
    return NZCoefficients(
        CuspShape.from_exact(0, 12), ComplexVal(0, 2 * SQRT3 / 3), ComplexVal(0, 23 * SQRT3 / 90)
    )


# acceptance verdict lines, echoed in the terminal summary
ACCEPTANCE_LINES = []
_SESSION = {}
SUITE_LIMIT_S = 120.0


def pytest_sessionstart(session):
    import time

    _SESSION["t0"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time

    elapsed = time.perf_counter() - _SESSION.get("t0", time.perf_counter())
    lines = list(ACCEPTANCE_LINES)
    if any(line.split(":")[0].endswith("criterion 11") for line in lines):
        ok = elapsed < SUITE_LIMIT_S
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion 11 (suite wall-clock): {elapsed:.1f} s, limit {SUITE_LIMIT_S:.0f} s")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
