"""Shared pytest plumbing.

The acceptance tests print one visible verdict line each; for that, a
fixture needs to know whether its test body passed, so the standard
report-stashing hook below records each phase's report on the item.
"""

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)
