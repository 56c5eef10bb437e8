import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from lecam.divergences import DiscreteDistribution


@st.composite
def distribution_pairs(draw, min_size=1, max_size=64, allow_zeros=True):
    n = draw(st.integers(min_size, max_size))
    lo = 0 if allow_zeros else 1
    raw_p = draw(st.lists(st.integers(lo, 100), min_size=n, max_size=n).filter(lambda xs: sum(xs) > 0))
    raw_q = draw(st.lists(st.integers(lo, 100), min_size=n, max_size=n).filter(lambda xs: sum(xs) > 0))
    return DiscreteDistribution.normalized(raw_p), DiscreteDistribution.normalized(raw_q)


def exact_fractions(raw):
    total = sum(raw)
    return [Fraction(x, total) for x in raw]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for check in mod.CHECKS:
        if check.criterion in mod.RESULTS:
            terminalreporter.write_line(mod.format_line(check.criterion))
