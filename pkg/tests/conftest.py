from __future__ import annotations

import pytest

from graphtalk.engine import load_fixture
from graphtalk.schema import load_preset


@pytest.fixture(scope="session")
def movie_schema():
    return load_preset("movie")


@pytest.fixture(scope="session")
def mardi_schema():
    return load_preset("mardi")


@pytest.fixture(scope="session")
def hyena_schema():
    return load_preset("hyena")


@pytest.fixture(scope="session")
def movie_graph():
    return load_fixture("movie")


@pytest.fixture(scope="session")
def mardi_graph():
    return load_fixture("mardi")


@pytest.fixture(scope="session")
def hyena_graph():
    return load_fixture("hyena")
