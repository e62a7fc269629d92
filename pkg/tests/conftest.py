from __future__ import annotations

import pathlib

import pytest

from sevpredict import LabelledInstance, SeverityClass, UnlabelledInstance

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"

HS = SeverityClass.HIGH_SEVERITY
CR = SeverityClass.CRITICAL
MA = SeverityClass.MAJOR
NT = SeverityClass.NON_TRIVIAL
CL = SeverityClass.CLEAN


def make_labelled(features, label, *, loc=100, provenance="original", module_id=None):
    return LabelledInstance(tuple(float(v) for v in features), loc, label, provenance, module_id)


def make_unlabelled(features, *, loc=100, module_id=None):
    return UnlabelledInstance(tuple(float(v) for v in features), loc, module_id)


@pytest.fixture
def mini_fixture_path():
    return DATA_DIR / "mini_fixture.csv"


@pytest.fixture
def reference_bst_path():
    return DATA_DIR / "reference_bst_predictions.csv"


@pytest.fixture
def reference_ast_path():
    return DATA_DIR / "reference_ast_predictions.csv"
