from __future__ import annotations

import pathlib

import pytest

from tggkit import documents

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN_DIR = pathlib.Path(__file__).resolve().parent / "golden"

RULESET_PATH = FIXTURE_DIR / "companytoit.ruleset.json"
TRIPLE_PATH = FIXTURE_DIR / "two_admins_one_employee.triple.json"
METAMODEL_PATH = FIXTURE_DIR / "companytoit.metamodel.json"


@pytest.fixture(scope="session")
def grammar():
    return documents.load_path(RULESET_PATH, expected_kind="RULESET")


@pytest.fixture(scope="session")
def metamodel(grammar):
    return grammar.metamodel


@pytest.fixture(scope="session")
def _two_admins_master(metamodel):
    return documents.load_path(TRIPLE_PATH, expected_kind="TRIPLE", metamodel=metamodel)


@pytest.fixture()
def two_admins(_two_admins_master):
    return _two_admins_master.copy()
