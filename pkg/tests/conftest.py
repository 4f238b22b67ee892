import pytest

from tagchain.server import setup_server, setup_tag
from tagchain.simnet import make_world
from tagchain.wire import Scheme


@pytest.fixture(params=[Scheme.S1, Scheme.S2], ids=["s1", "s2"])
def scheme(request):
    return request.param


@pytest.fixture
def db(scheme):
    return setup_server(64, seed=11, scheme=scheme)


@pytest.fixture
def tag_and_db(db):
    return setup_tag(db, "t")


@pytest.fixture
def world(scheme):
    return make_world(3, seed=5, scheme=scheme)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
