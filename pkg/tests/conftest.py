import pytest

from gogconj import corpus
from gogconj.conjalg import cover_of

GRAPHS = ["klein", "flat", "p2", "sol", "kleinedge", "seifert2"]


@pytest.fixture(scope="session")
def graphs():
    return {name: corpus(name) for name in GRAPHS}


@pytest.fixture(scope="session")
def covers(graphs):
    return {name: cover_of(X) for name, X in graphs.items()}
