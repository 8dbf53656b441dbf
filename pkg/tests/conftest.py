"""Per-criterion verdicts for the acceptance suite.

Tests in test_acceptance.py carry ``@pytest.mark.criterion(n)``; a
criterion passes when every test carrying its number passed.  An expected
failure counts as a failed criterion.
"""

import pytest

TITLES = {
    1: "triangular spectrum of the strip pieces",
    2: "modulation identity of the strip pieces",
    3: "counterexample scaling",
    4: "Plancherel for the linear square function",
    5: "partition reconstruction",
    6: "oracle/fast equivalence and speed",
    7: "linear square function regression",
    8: "tree estimate",
    9: "decomposition postconditions",
    10: "energy bounds",
    11: "orthogonality of packet sums",
    12: "wave packet contract",
}

_results: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and not hasattr(rep, "wasxfail")
        _results.setdefault(marker.args[0], []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in _results:
            continue
        verdict = "PASS" if all(_results[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {TITLES[n]}")
