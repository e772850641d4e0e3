import math

import numpy as np
import pytest

from tubefocal import framekit as fk
from tubefocal import tubes as tb
from tubefocal.exprcurve import CurveDef, parse_expr

SQRT2 = math.sqrt(2.0)

SPIRAL = ("(u/sqrt2 + 1)*cos(ln(u/sqrt2 + 1))", "(u/sqrt2 + 1)*sin(ln(u/sqrt2 + 1))", "0")
HELIX = ("cos(u/sqrt2)", "sin(u/sqrt2)", "u/sqrt2")
HELIX_T = ("-sin(u/sqrt2)/sqrt2", "cos(u/sqrt2)/sqrt2", "1/sqrt2")
# frame with k_g = k_n = 1/(2 sqrt2), tau_g = 1/2 along the helix, right-handed
HELIX_Y = ("-(cos(u/sqrt2) + sin(u/sqrt2)/sqrt2)/sqrt2", "-(sin(u/sqrt2) - cos(u/sqrt2)/sqrt2)/sqrt2", "-1/2")
HELIX_U = ("(-cos(u/sqrt2) + sin(u/sqrt2)/sqrt2)/sqrt2", "(-sin(u/sqrt2) - cos(u/sqrt2)/sqrt2)/sqrt2", "1/2")
# the same helix with (Y, U) as commonly printed: U above is this Y, and this U is -Y above
PRINTED_Y = ("(-cos(u/sqrt2) + sin(u/sqrt2)/sqrt2)/sqrt2", "(-sin(u/sqrt2) - cos(u/sqrt2)/sqrt2)/sqrt2", "1/2")
PRINTED_U = ("(cos(u/sqrt2) + sin(u/sqrt2)/sqrt2)/sqrt2", "(sin(u/sqrt2) - cos(u/sqrt2)/sqrt2)/sqrt2", "1/2")
CIRCLE2 = ("2*cos(u/2)", "2*sin(u/2)", "0")


def curve(comps, domain=(-np.inf, np.inf)):
    return CurveDef.from_strings(*comps, domain=domain)


def helix_source(kg="1/(2*sqrt2)", kn="1/(2*sqrt2)", taug="1/2", Y=HELIX_Y, U=HELIX_U):
    return fk.DirectDarboux(curve(HELIX), curve(HELIX_T), curve(Y), curve(U),
                            parse_expr(kg), parse_expr(kn), parse_expr(taug))


@pytest.fixture(scope="session")
def spiral():
    return curve(SPIRAL, (-1.0, 10.0))


@pytest.fixture(scope="session")
def spiral_spine(spiral):
    return tb.FrenetSpine(spiral, span=(0.0, 4.0))


@pytest.fixture(scope="session")
def helix():
    return curve(HELIX)


@pytest.fixture(scope="session")
def ex2():
    return helix_source()


@pytest.fixture(scope="session")
def circle_spine():
    return tb.FrenetSpine(curve(CIRCLE2), span=(0.0, 12.0))


ACCEPTANCE = []  # (number, verdict, text), filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, verdict, text in sorted(ACCEPTANCE):
            terminalreporter.write_line(f"{verdict} {text}")
