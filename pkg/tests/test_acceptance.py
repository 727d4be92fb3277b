"""Acceptance criteria at their stated tolerances.

Each criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are also
collected into an "acceptance criteria" section of the terminal summary.
"""

import pytest

from tmsnet.validate import CRITERIA, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    res = run_criterion(number)
    line = res.line() + f" [{res.runtime_s:.1f} s]"
    if res.notes:
        line += f" -- {res.notes}"
    print(line)
    acceptance_log.append(line)
    assert res.passed, line
