"""Acceptance criteria 1-8 at their stated tolerances.

Each test prints its pass/fail line; the lines are repeated together in the
"acceptance criteria" section at the end of the pytest report.  The full
suite takes roughly ten minutes on one core.
"""

import pytest

from primhd.acceptance import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"criterion_{k}" for k in sorted(CRITERIA)])
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.line()
