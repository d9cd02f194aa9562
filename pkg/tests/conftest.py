import os
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from quatpack.orders import quadratic_cover, table1_at, table2_cover
from quatpack.packing import enumerate_apollonian, enumerate_superpacking

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str):
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        ok = ok and prev[0]
        detail = prev[1] + "; " + detail
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@lru_cache(maxsize=None)
def cover(sel: str):
    """Covers used across the suite, by short name."""
    if sel.startswith("m="):
        return quadratic_cover(int(sel[2:]))
    if sel.startswith("T1:"):
        a, n = (int(v) for v in sel[3:].split(","))
        return table1_at(a, n)[0][2]
    return table2_cover(sel)


@lru_cache(maxsize=None)
def apollonian(sel: str, bound: int):
    return enumerate_apollonian(cover(sel), bound)


@lru_cache(maxsize=None)
def superpacking(sel: str, bound: int):
    return enumerate_superpacking(cover(sel), bound)


@pytest.fixture(scope="session")
def z5():
    return cover("m=5")
