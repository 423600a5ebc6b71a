import pytest

from tracelogic import SearchOptions, fixture, search

_cache = {}


def run_fixture(name, **opts):
    key = (name, tuple(sorted(opts.items())))
    if key not in _cache:
        scenario = fixture(name).scenario()
        _cache[key] = (scenario, search(scenario, SearchOptions(**opts)))
    return _cache[key]


@pytest.fixture(scope="session")
def timestamps_all():
    return run_fixture("tmn_timestamps", stop_at_first=False)


@pytest.fixture(scope="session")
def mutual_all():
    return run_fixture("tmn_mutual", stop_at_first=False)


@pytest.fixture(scope="session")
def mutual_first():
    return run_fixture("tmn_mutual")
