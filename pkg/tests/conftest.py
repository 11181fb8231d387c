import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


import math
import time

import pytest


@pytest.fixture(scope="session")
def herald_batch():
    """10^5 trajectories from |ee> at controlled antiresonance, gamma*dt = 1e-3."""
    from wgpair.core import SystemParams, basis_state
    from wgpair.trajectories import run_trajectories

    params = SystemParams(math.pi / 2, 1.0)
    start = time.perf_counter()
    batch = run_trajectories(params, basis_state("ee"), 1e-3, 100_000, seed=42, tmax=30.0)
    return batch, time.perf_counter() - start
