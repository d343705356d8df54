import pytest

from quasilattice.pentagrid import Pentagrid, generate_patch

ACCEPTANCE = {}


def record(number, name, ok, detail):
    """Remember one acceptance verdict for the end-of-run summary."""
    ACCEPTANCE[number] = (name, bool(ok), detail)
    print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture(scope="session")
def small_patch():
    return generate_patch(Pentagrid(), 6)


@pytest.fixture(scope="session")
def big_patch():
    return generate_patch(Pentagrid(), 25)
