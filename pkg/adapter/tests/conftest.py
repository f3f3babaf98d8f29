"""Pytest fixtures for the adapter suite."""

import pytest

from _adapter_fixtures import run_enhancer


@pytest.fixture(scope="session")
def enhancer_available():
    proc = run_enhancer("--help")
    if proc.returncode != 0:
        pytest.skip("utilenhance CLI not installed")
    return True
