from __future__ import annotations

from pathlib import Path

import pytest

from privhub.manifest import Manifest, load_manifest
from privhub.runtime import HubRuntime

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"
MANIFESTS = FIXTURES / "manifests"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def fixture_manifest(slug: str) -> Manifest:
    return load_manifest(MANIFESTS / f"{slug}.json")


@pytest.fixture
def make_runtime(tmp_path):
    """Factory for isolated runtimes over the shared fixture corpus."""

    count = 0

    def factory(**kwargs) -> HubRuntime:
        nonlocal count
        count += 1
        kwargs.setdefault("data_dir", FIXTURES)
        kwargs.setdefault("ledger_path", tmp_path / f"ledger-{count}.ndjson")
        return HubRuntime(**kwargs)

    return factory
