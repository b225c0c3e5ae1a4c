"""Runs every acceptance criterion at its stated tolerance and prints one line each."""
import pytest

from vm_landau import acceptance


@pytest.mark.parametrize("cid", [c[0] for c in acceptance.CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '_')}" for c in acceptance.CRITERIA])
def test_criterion(cid, capsys):
    result = acceptance.run_criterion(cid)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.details
