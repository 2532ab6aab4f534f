from __future__ import annotations

import sys
from pathlib import Path

import pytest

from pvn.lang import load
from pvn.model import NetworkSnapshot

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def fig1_text() -> str:
    return (DATA / "fig1.pvn").read_text()


@pytest.fixture(scope="session")
def fig1(fig1_text) -> NetworkSnapshot:
    return load(fig1_text).snapshot


@pytest.fixture(scope="session")
def reassign_text() -> str:
    return (DATA / "reassign.pvn").read_text()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")
