import pytest


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    # stash phase reports so teardown fixtures can see the test outcome
    rep = yield
    setattr(item, f"_rep_{rep.when}", rep)
    return rep
