import time
from dataclasses import replace

import pytest

from relaxcns.harness import ExperimentConfig, run_stability


@pytest.fixture(scope="session")
def default_stability():
    """Default desk-scale stability experiment (with its zero-perturbation floor run)."""
    t0 = time.perf_counter()
    summary = run_stability(ExperimentConfig())
    return summary, time.perf_counter() - t0


@pytest.fixture(scope="session")
def single_shock_stability():
    t0 = time.perf_counter()
    summary = run_stability(replace(ExperimentConfig(), v_minus=1.0))
    return summary, time.perf_counter() - t0
