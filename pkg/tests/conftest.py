import pytest

from lawvere import FiniteAlgebra, builtin_theory


@pytest.fixture(scope="session")
def monoid():
    return builtin_theory("monoid")


@pytest.fixture(scope="session")
def group():
    return builtin_theory("group")


@pytest.fixture(scope="session")
def semilattice():
    return builtin_theory("semilattice")


@pytest.fixture(scope="session")
def pointed():
    return builtin_theory("pointed_set")


@pytest.fixture(scope="session")
def bare_sets():
    return builtin_theory("set")


def cyclic_group(theory, n):
    return FiniteAlgebra.from_functions(
        theory, n, mul=lambda a, b: (a + b) % n, inv=lambda a: (-a) % n, e=0)


def klein_group(theory):
    return FiniteAlgebra.from_functions(theory, 4, mul=lambda a, b: a ^ b, inv=lambda a: a, e=0)


def z2_monoid(theory, identity=0):
    if identity == 0:
        return FiniteAlgebra.from_functions(theory, 2, mul=lambda a, b: a ^ b, e=0)
    return FiniteAlgebra.from_functions(theory, 2, mul=lambda a, b: 1 - (a ^ b), e=1)


def or_monoid(theory):
    return FiniteAlgebra.from_functions(theory, 2, mul=lambda a, b: a | b, e=0)


# -- acceptance reporting: one PASS/FAIL line per criterion -----------------

_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, text = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        ok = report.passed
        prev = _acceptance_results.get(number, (text, True))
        _acceptance_results[number] = (text, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        text, ok = _acceptance_results[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")
