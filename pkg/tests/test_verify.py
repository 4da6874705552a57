"""Tests for the randomized operator identity suite."""

import logging

import pytest

from fpcca.errors import DataError
from fpcca.verify import IDENTITY_CHECKS, ORACLE_CHECKS, Q2_SIGN_FAULT, run_verification


def test_small_run_passes():
    report = run_verification(trials=12, dim=4, seed=1)
    assert report.passed
    assert report.failures == []
    assert [check.name for check in report.checks] == list(IDENTITY_CHECKS + ORACLE_CHECKS)


def test_injected_fault_is_detected(caplog):
    with caplog.at_level(logging.WARNING):
        report = run_verification(trials=5, dim=4, seed=1, inject_fault=Q2_SIGN_FAULT)
    assert not report.passed
    assert report.failures == ["q2_inverse"]
    assert "q2_inverse" in caplog.text


def test_scalar_blocks():
    report = run_verification(trials=10, dim=1, seed=3)
    assert report.passed
    assert all(check.max_error < 1e-10 for check in report.checks)


def test_tolerances_are_reported():
    report = run_verification(trials=2, dim=3, tol=1e-7, oracle_tol=1e-6)
    tols = {check.name: check.tol for check in report.checks}
    assert tols["q3_inverse"] == 1e-7
    assert tols["roy_equivalence"] == 1e-6


def test_invalid_arguments():
    with pytest.raises(DataError):
        run_verification(trials=0)
    with pytest.raises(DataError):
        run_verification(trials=1, dim=0)
    with pytest.raises(DataError):
        run_verification(trials=1, inject_fault="nope")


@pytest.mark.slow
def test_default_run_passes():
    assert run_verification().passed
