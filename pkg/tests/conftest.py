import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from marginlab import canonical  # noqa: E402


@pytest.fixture(params=["D1", "D2", "D3"])
def canon(request):
    return canonical(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
