import pytest

from graphfilt.verify import SUITES, run_all, report_json, suite_resolvent


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    res = SUITES[name](7, 30)
    assert res.passed, res.failures[:3]
    assert res.instances > 0


def test_negative_self_test_fails():
    res = suite_resolvent(0, 10, negative=True)
    assert not res.passed
    assert {"instance", "seed"} <= set(res.failures[0])


def test_report_is_reproducible():
    a = report_json(run_all(3, 5), 3, 5)
    b = report_json(run_all(3, 5), 3, 5)
    assert a == b and a["passed"]
