import os

import pytest
from hypothesis import settings

settings.register_profile("lattc", deadline=None, max_examples=40, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "lattc"))

_CRITERIA: dict[int, list[tuple[str, bool, float]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    _CRITERIA.setdefault(mark.args[0], []).append((item.originalname, rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        runs = _CRITERIA[n]
        ok = all(p for _, p, _ in runs)
        secs = sum(d for _, _, d in runs)
        names = sorted({name for name, _, _ in runs})
        names = ", ".join(names) + (f" x{len(runs)}" if len(runs) > len(names) else "")
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({secs:.2f} s)  {names}")
