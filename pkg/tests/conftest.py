import shutil

import pytest

from soundabs.corpus import load_problem
from soundabs.syntax import formula_from_text

HAVE_Z3 = shutil.which("z3") is not None
needs_solver = pytest.mark.skipif(not HAVE_Z3, reason="z3 is not on PATH")


@pytest.fixture(scope="session")
def clear_a():
    return load_problem("clear_a")


@pytest.fixture(scope="session")
def clear_a_bat(clear_a):
    return clear_a[0]


@pytest.fixture
def parse(clear_a_bat):
    """Parse a formula against the ClearA vocabulary."""
    def _parse(text, **kw):
        scope = clear_a_bat.scope()
        for k, v in kw.items():
            setattr(scope, k, v)
        return formula_from_text(text, scope)
    return _parse


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
