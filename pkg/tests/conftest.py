import pytest

from maintplan.assembly import load_assembly
from maintplan.cli import data_file


@pytest.fixture(scope="session")
def block2():
    return load_assembly(data_file("block2.json"))


@pytest.fixture(scope="session")
def block4():
    return load_assembly(data_file("block4.json"))


@pytest.fixture(scope="session")
def valve9():
    return load_assembly(data_file("valve9.json"))


# criterion number -> (passed, description); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {desc}")
