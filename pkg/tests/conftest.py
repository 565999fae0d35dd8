import numpy as np
import pytest

from pmgoal import synth_dataset


@pytest.fixture(scope="session")
def small_synth():
    # 3 goals x 4 traces, easy noise; fast enough for end-to-end checks
    return synth_dataset(n_goals=3, traces_per_goal=4, n_features=8, regimes=3, noise=0.2, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int("".join(c for c in k.split()[0] if c.isdigit())), k)):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
