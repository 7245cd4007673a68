"""Session-level caches for the expensive full-pipeline analyses."""

import time

import pytest

from circlerds.cli import RunConfig, run_analysis
from circlerds.fixtures import builtin


@pytest.fixture(scope="session")
def analysis_cache():
    """Full default-config analyses, computed once per session on demand."""
    cache: dict[str, tuple[dict, float]] = {}

    def get(name: str):
        if name not in cache:
            system = builtin(name)
            t0 = time.monotonic()
            result = run_analysis(system, RunConfig())
            cache[name] = (result, time.monotonic() - t0)
        return cache[name]

    return get
