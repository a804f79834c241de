"""All acceptance criteria at their stated tolerances, one test each."""

import pytest

from lincalderon.acceptance import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = run_criterion(number)
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line


def test_unknown_criterion_rejected():
    with pytest.raises(ValueError, match="no acceptance criterion 99"):
        run_criterion(99)
