import sys

import pytest

from gaitbench.synthetic import synthetic_mask_pack, synthetic_sequence


@pytest.fixture(scope="session")
def seq30():
    return synthetic_sequence(30, 64, 64, seed=7)


@pytest.fixture(scope="session")
def pack():
    return synthetic_mask_pack(10, seed=3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        name, ok, detail, elapsed, limit = mod.RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number}. {name}: {detail} ({elapsed:.2f}s / {limit:g}s)")
