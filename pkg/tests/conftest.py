import pytest

from teamcurriculum.overcooked.layout import parse_layout

# 3x3 open floor, stations on the rim; used for exhaustive movement checks.
OPEN_3X3 = "\n".join(
    [
        "XXPXX",
        "O1  X",
        "X   S",
        "X  2X",
        "XXDXX",
    ]
)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def open_layout():
    return parse_layout(OPEN_3X3, name="open3x3")


@pytest.fixture
def acceptance_record():
    def record(name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
