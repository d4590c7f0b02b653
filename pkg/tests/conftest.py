import pytest

_acceptance: dict[str, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    cid, title = marker.args
    _acceptance.setdefault(cid, [])
    _acceptance[cid].append((title, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_acceptance, key=lambda c: int(c.lstrip("AC"))):
        runs = _acceptance[cid]
        ok = all(passed for _, passed in runs)
        terminalreporter.write_line(f"{cid:>4}  {'PASS' if ok else 'FAIL'}  {runs[0][0]}")
