import functools

import pytest

from grccrtd.pipeline import CONE, FIXTURES, RLT, load_fixture, run, variant


@functools.lru_cache(maxsize=None)
def fixture_study(name, variant_name=None):
    study = load_fixture(name)
    return study if variant_name is None else variant(study, variant_name)


@functools.lru_cache(maxsize=None)
def fixture_run(name, formulation, variant_name=None):
    return run(fixture_study(name, variant_name), formulation)


@pytest.fixture(params=FIXTURES)
def fixture_name(request):
    return request.param


@pytest.fixture
def case3():
    return fixture_study("case3")


__all__ = ["fixture_study", "fixture_run", "RLT", "CONE"]


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
