import json

import pytest

from metricprobe.reports import dumps_report
from metricprobe.verify import SUITES, run_verify


def test_suite_registry():
    assert set(SUITES) == {"identities", "coordinate-independence",
                           "wick-fock", "reductions"}


def test_unknown_suite_lists_available():
    with pytest.raises(ValueError) as exc:
        run_verify(["identities", "nope"])
    msg = str(exc.value)
    assert "nope" in msg
    assert "reductions" in msg


def test_unmatched_tolerance_override_rejected():
    with pytest.raises(ValueError) as exc:
        run_verify(["reductions"], {"not-a-check": 1.0})
    assert "not-a-check" in str(exc.value)


def test_reductions_suite_report_shape():
    report = run_verify(["reductions"])
    assert report["all_passed"]
    assert list(report["suites"]) == ["reductions"]
    checks = report["suites"]["reductions"]["checks"]
    names = [c["name"] for c in checks]
    assert names == ["proper-time-mean", "proper-time-bound", "unruh-product"]
    for c in checks:
        assert c["passed"]
        assert c["comparison"] in ("<=", ">=")
        assert c["residual"] <= c["tolerance"]
    # the report body serializes cleanly
    assert json.loads(dumps_report(report))["all_passed"] is True


def test_tolerance_override_forces_failure():
    report = run_verify(["reductions"], {"proper-time-mean": -1.0})
    assert not report["all_passed"]
    chk = report["suites"]["reductions"]["checks"][0]
    assert chk["tolerance"] == -1.0
    assert not chk["passed"]


def test_wick_fock_suite_passes():
    report = run_verify(["wick-fock"])
    assert report["all_passed"]
    checks = report["suites"]["wick-fock"]["checks"]
    assert len(checks) == 7
    assert all(c["residual"] <= 1e-8 for c in checks)
