"""The nine end-to-end checks, one pass/fail line each (run with ``-s`` to see them)."""

import pytest

from xorgames.acceptance import CHECKS


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__.removeprefix("check_") for c in CHECKS])
def test_acceptance(check, capsys):
    res = check(0)
    with capsys.disabled():
        print(f"\n{res.line()}")
    assert res.passed, res.detail
