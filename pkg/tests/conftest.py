import pytest

from gfmcheck.generators import running_example


@pytest.fixture
def example_nbw():
    return running_example()[0]


@pytest.fixture
def example_chain():
    return running_example()[1]
