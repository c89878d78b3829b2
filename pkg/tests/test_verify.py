"""Self-verification suites must all come back clean from fixed seeds."""

import pytest

from locword import verify


@pytest.fixture(scope="module")
def results():
    return {r.name: r for r in verify.run_all()}


def test_all_suites_present(results):
    assert len(results) == len(verify.ALL_SUITES) == 10


@pytest.mark.parametrize(
    "name",
    [
        "determinant-transfer identity",
        "Green two-method agreement",
        "eigenpair residuals",
        "unimodularity",
        "cocycle composition",
        "evolution unitarity",
        "kernel domination",
        "sampling stationarity",
        "spectral interlacing",
        "ballistic cone guard",
    ],
)
def test_suite_has_zero_violations(results, name):
    r = results[name]
    assert r.passed, r.detail
    assert r.cases > 0


def test_results_are_deterministic():
    a = verify.determinant_transfer_identity(cases=20)
    b = verify.determinant_transfer_identity(cases=20)
    assert a.worst == b.worst
    assert a.cases == b.cases


def test_detail_strings_are_informative(results):
    for r in results.values():
        assert r.detail
        assert any(ch.isdigit() for ch in r.detail)
