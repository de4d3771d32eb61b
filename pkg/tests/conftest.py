from __future__ import annotations

from pathlib import Path

import pytest

from regmine.minilang import Scenario, decode_scenario, parse_program

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def base_program():
    return parse_program(fixture_text("base.mp"))


@pytest.fixture(scope="session")
def upgraded_program():
    return parse_program(fixture_text("upgraded.mp"))


@pytest.fixture(scope="session")
def buggy_program():
    return parse_program(fixture_text("upgraded_buggy.mp"))


@pytest.fixture(scope="session")
def base_scenario() -> Scenario:
    return decode_scenario(fixture_text("scenario_base.scn"))


@pytest.fixture(scope="session")
def upgraded_scenario() -> Scenario:
    return decode_scenario(fixture_text("scenario_upgraded.scn"))
