import os

import pytest

_REPO = os.path.join(os.path.dirname(os.path.abspath(__file__)), "Repo")


@pytest.fixture(autouse=True, scope="session")
def _run_from_repo():
    # The test suite reads its data files by paths relative to Repo/.
    previous = os.getcwd()
    os.chdir(_REPO)
    yield
    os.chdir(previous)
