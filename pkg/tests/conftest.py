import pytest

from secretgame import PartitionProfile

ACCEPTANCE = {
    1: "capped NE correctness on random instances",
    2: "closed-form identities",
    3: "gamma-invariance of the capped NE",
    4: "worked capped example",
    5: "costly regimes",
    6: "commitment LP worked example",
    7: "best-response structure vs enumeration",
    8: "dictionary sampler fidelity",
    9: "sweep shapes",
    10: "scale on the RockYou-shaped profile",
}

_outcomes: dict[int, list[tuple[bool, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by this test")


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    n = dict(report.user_properties).get("criterion")
    if not n:
        return
    if report.when == "call" or report.outcome != "passed":
        # a strict expected failure still means the criterion, read literally, does not hold
        note = getattr(report, "wasxfail", "")
        _outcomes.setdefault(n, []).append((report.outcome == "passed" and not note, note))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in ACCEPTANCE.items():
        if n not in _outcomes:
            continue
        results = _outcomes[n]
        status = "PASS" if all(ok for ok, _ in results) else "FAIL"
        notes = sorted({note for _, note in results if note})
        suffix = f" (known: {'; '.join(notes)})" if notes else ""
        terminalreporter.write_line(f"{status} criterion {n}: {title}{suffix}")


@pytest.fixture
def example_a():
    return PartitionProfile((3, 3), (0.0, 1.0))


@pytest.fixture
def example_d():
    return PartitionProfile((2, 4), (0.0, 1.0))
