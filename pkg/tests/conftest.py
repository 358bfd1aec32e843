import numpy as np
import pytest

# algebras exercised throughout the suite
FAMILIES = [
    "su:2", "su:3", "so:4", "so:5", "sl_real:2", "sl_real:3",
    "su_pq:2,1", "su_pq:1,1", "sl_complex:2", "sl_complex:3",
]

# strong-reg generation targets, grouped by the shape of the Vogan diagram
GENERATION_ALGEBRAS = [
    "su:2", "su:3", "sl_real:2", "su_pq:2,1", "sl_complex:2", "sl_complex:3", "sl_real:3",
]

# Killing form = k * tr(XY) on the defining representation
TRACE_FACTOR = {
    "sl_real:2": 4, "sl_real:3": 6, "su:2": 4, "su:3": 6, "su_pq:2,1": 6, "su_pq:1,1": 4,
    "so:4": 2, "so:5": 3, "sp:1": 4, "sp:2": 6, "so_pq:2,1": 1, "so_pq:2,2": 2,
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
