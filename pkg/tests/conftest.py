import pytest

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): an acceptance criterion, reported by name")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is not None and call.when == "call":
        outcome = "PASS" if call.excinfo is None else "FAIL"
        _criteria.append(f"{outcome}  {marker.args[0]}")


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
