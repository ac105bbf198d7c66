import pytest

# (criterion, passed, detail) lines recorded by the acceptance module
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    def record(number: int, name: str, passed: bool, detail: str = "") -> bool:
        passed = bool(passed)
        line = (number, name, passed, detail)
        ACCEPTANCE.append(line)
        print(_format(line))
        return passed

    return record


def _format(line) -> str:
    number, name, passed, detail = line
    return f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda l: l[0]):
        terminalreporter.write_line(_format(line))
