import pytest

import kramers_reset as kr

PAPER_X0 = -2.899


@pytest.fixture(scope="session")
def spec():
    return kr.PotentialSpec(6.0, 1.0)


@pytest.fixture(scope="session")
def paper_params():
    return kr.SimParams(eta=0.1, eps=1.8, x0=PAPER_X0)


@pytest.fixture(scope="session")
def paper_no_reset(spec, paper_params):
    """Reset-free ensemble at the paper's parameters, N=1e4 (shared, ~10 s)."""
    return kr.run_ensemble(spec, paper_params, kr.NoReset(), None, 10_000, 42)


def pytest_terminal_summary(terminalreporter):
    from _helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[-1])):
        ok, lines = ACCEPTANCE[key]
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {lines[0]}")
        for line in lines[1:]:
            tr.write_line(line)
