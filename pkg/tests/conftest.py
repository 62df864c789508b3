import math

import pytest

from nkuzmin.cf_core import Params

SQRT3_M1 = math.sqrt(3) - 1
GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture(params=[1, 2, 5])
def params(request):
    return Params(request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
