import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import fixture  # noqa: E402

from rvppbid.sequence import run_session  # noqa: E402


@pytest.fixture(scope="session")
def case():
    return fixture("case_study")


@pytest.fixture(scope="session")
def dam_det(case):
    entry, bundle = run_session(case, "DAM_SRM", None, "deterministic")
    return entry, bundle


@pytest.fixture(scope="session")
def dam_prop(case):
    entry, bundle = run_session(case, "DAM_SRM", None, "proposed")
    return entry, bundle
