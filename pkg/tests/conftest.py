import copy

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

MINIMAL = {
    "schema_version": 1,
    "nodes": [
        {"id": "cg", "role": "carrier", "position": [0.0, 0.0, 1.0]},
        {"id": "tag", "role": "tag", "position": [1.0, 0.0, 1.0]},
        {"id": "rx", "role": "receiver", "position": [11.0, 0.0, 1.0]},
    ],
}


@pytest.fixture
def minimal_doc():
    return copy.deepcopy(MINIMAL)


# (number, title, passed, detail) rows filled in by test_acceptance
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} {status}: {title} ({detail})")
