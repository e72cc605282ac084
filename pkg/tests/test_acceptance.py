"""Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL line per check.

The lines are repeated in the pytest terminal summary; the same checks are
available as ``maass-periods check``.
"""

import pytest
from conftest import ACCEPTANCE_LINES

from maass_periods.acceptance import CRITERIA, Context

pytestmark = pytest.mark.slow

# the period quotient is 0/0 for this configuration: cycle integrals of a
# real-coefficient cusp form of weight 2k with k even have vanishing real part
DEGENERATE = {(5, "period formula on C(2,1,1,1)")}


@pytest.fixture(scope="session")
def ctx():
    return Context()


@pytest.fixture(scope="session")
def results(ctx):
    cache = {}

    def get(criterion):
        if criterion not in cache:
            cache[criterion] = CRITERIA[criterion](ctx)
            for chk in cache[criterion]:
                print(chk.line())
                ACCEPTANCE_LINES.append(chk.line())
        return cache[criterion]

    return get


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(results, criterion):
    checks = [c for c in results(criterion) if (c.criterion, c.name) not in DEGENERATE]
    assert checks
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)


@pytest.mark.xfail(reason="(G, C) vanishes identically for k = 6, so the period quotient is undefined", strict=True)
def test_criterion_5_period_formula(results):
    chk = next(c for c in results(5) if (c.criterion, c.name) in DEGENERATE)
    assert chk.passed, chk.line()
