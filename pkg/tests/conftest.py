import pytest

_ACCEPTANCE: dict[int, str] = {}


class Verdict:
    """Records one PASS/FAIL line per acceptance criterion."""

    def __call__(self, number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE[number] = line
        print(line)
        assert passed, line


@pytest.fixture
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
