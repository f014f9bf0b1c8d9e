import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
warnings.filterwarnings("ignore", message=".*TBB.*")

import oracles  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return oracles.dyadic_corpus()


@pytest.fixture(scope="session")
def srw():
    from stronghyp.freegroup import WalkMeasure

    return WalkMeasure.simple(2)


@pytest.fixture(scope="session")
def nonuniform():
    from stronghyp.freegroup import nonuniform_f2

    return nonuniform_f2()


ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion (printed in the terminal summary)."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
