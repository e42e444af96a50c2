from __future__ import annotations

import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Acceptance lines collected by tests/test_acceptance.py.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pattern_sets():
    """The five pattern sets, computed once per session."""
    from treelike.appendix import fragment_names
    from treelike.chromatic import _pattern_set_cached
    from treelike.constructions import bracket_str, parse_bracket

    # Shares the cache used by the certificate code.
    return {bracket_str(parse_bracket(n)): _pattern_set_cached(bracket_str(parse_bracket(n))) for n in fragment_names()}
