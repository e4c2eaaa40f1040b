import pytest

from amoun import baselines
from amoun.numeric import RandomSource
from amoun.scheme import KeyGenParams, generate_group_keys

_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("acceptance")
    if marker and (report.when == "call" or report.failed or report.skipped):
        number, title = marker.args
        previous = _acceptance_results.get(number, (title, "PASS"))[1]
        outcome = "PASS" if report.passed and previous == "PASS" else "FAIL"
        if report.skipped:
            outcome = "SKIP"
        _acceptance_results[number] = (title, outcome)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        title, outcome = _acceptance_results[number]
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {title}")


@pytest.fixture(scope="session")
def amoun_pools():
    """Per-size pools of AMOUN keys (scaled parameters), reused across tests."""
    cache = {}

    def get(alpha_bits, count=12):
        if alpha_bits not in cache or len(cache[alpha_bits]) < count:
            rng = RandomSource(1000 + alpha_bits)
            cache[alpha_bits] = generate_group_keys(count, KeyGenParams.scaled(alpha_bits), rng)
        return cache[alpha_bits]

    return get


@pytest.fixture(scope="session")
def rsa_pools():
    cache = {}

    def get(bits, count=12):
        if bits not in cache or len(cache[bits]) < count:
            cache[bits] = baselines.generate_rsa_keys(count, bits, RandomSource(2000 + bits))
        return cache[bits]

    return get
