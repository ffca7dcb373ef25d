import pytest

from persistwalk.laws import make_law

# lattice laws with finite support: brute-force enumeration applies
LATTICE_ZOO = [
    "simple",
    "slackened:p0=1/4",
    "slackened:p0=1/2",
    "geom2:q+=1/2,q-=1/2,a0=0,m=2",
    "lattice:{2:1/3,-1:2/3}",
]

# laws for pathwise checks (infinite support allowed)
WALK_ZOO = LATTICE_ZOO[:4] + ["geom2:q+=1/2,q-=1/2,a0=0", "lattice:{2:1/3,-1:2/3}", "laplace"]

ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str) -> str:
    line = f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


@pytest.fixture(params=LATTICE_ZOO)
def lattice_law(request):
    return make_law(request.param)


@pytest.fixture(params=WALK_ZOO)
def walk_law(request):
    return make_law(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
