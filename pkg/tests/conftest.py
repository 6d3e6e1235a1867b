import pathlib
import sys

import pytest

SRC = pathlib.Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from corpus import FIXTURES, motivating_js, wat2wasm  # noqa: E402
from jwbinder.wasm import decode_module  # noqa: E402


@pytest.fixture(scope="session")
def motivating_source():
    return motivating_js()


@pytest.fixture(scope="session")
def motivating_module():
    return decode_module(wat2wasm((FIXTURES / "motivating.wat").read_text()))


@pytest.fixture
def assemble():
    """WAT text -> decoded module."""
    return lambda text: decode_module(wat2wasm(text))


_criteria: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1].removeprefix("test_criterion_")
        _criteria[name] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[0])):
        status, seconds = _criteria[name]
        number, _, title = name.partition("_")
        terminalreporter.write_line(f"criterion {number}: {status}  {title.replace('_', ' ')} ({seconds:.2f}s)")
