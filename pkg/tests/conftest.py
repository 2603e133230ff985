import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    label = crit.args[0]
    status = "PASS" if rep.passed else "FAIL"
    prev = ACCEPTANCE_LINES.get(label)
    # a criterion split over several tests passes only if every part passes
    if prev is None or prev.startswith("PASS"):
        ACCEPTANCE_LINES[label] = f"{status}  {label}: {item.name}"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(ACCEPTANCE_LINES[label])
