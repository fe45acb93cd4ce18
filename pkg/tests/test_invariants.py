import pytest

from swextrap.errors import UnknownSuite
from swextrap.invariants import SUITES, run_invariants


def test_extrap_closed_form_rows():
    rep = run_invariants("extrap", seed=11)
    rows = [r for r in rep.rows if r["name"].startswith("alpha_closed_form")]
    assert len(rows) == 64 and all(r["pass"] for r in rows)
    assert rep.passed


def test_traceineq_seed_7():
    rep = run_invariants("traceineq", seed=7)
    rows = [r for r in rep.rows if r["name"].startswith("trace_ratio")]
    assert len(rows) == 200
    assert sum(r["pass"] for r in rows) == 200


def test_deterministic():
    a = run_invariants("fnorm", seed=2, sizes="minimal")
    b = run_invariants("fnorm", seed=2, sizes="minimal")
    assert a.rows == b.rows


def test_unknown():
    with pytest.raises(UnknownSuite):
        run_invariants("nope")


@pytest.mark.parametrize("name", sorted(SUITES))
def test_minimal_suites_pass(name):
    rep = run_invariants(name, seed=0, sizes="minimal")
    failed = [r for r in rep.rows if not r["pass"]]
    assert not failed, failed


@pytest.mark.slow
def test_all_minimal_runtime():
    rep = run_invariants("all", seed=1, sizes="minimal")
    assert rep.passed
    assert rep.seconds < 120
    assert all("." in r["name"] for r in rep.rows)
