import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "hatlab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("hatlab")


def unit_vectors(rng, n, d):
    U = rng.standard_normal((n, d))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance reporting: one pass/fail line per criterion -------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and (rep.when == "call" or rep.failed or rep.skipped):
        n, title = mark.args
        detail = dict(item.user_properties).get("detail", "")
        prev = _CRITERIA.get(n)
        ok = rep.passed and (prev is None or prev[1])
        _CRITERIA[n] = (title, ok, detail or (prev[2] if prev else ""))
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}" + (f" ({detail})" if detail else ""))
