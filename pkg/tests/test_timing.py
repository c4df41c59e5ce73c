import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qfxemu.timing import TimingModel, cycle_count, gate_cycles


def closed_form(nq: int, flags: list[bool]) -> Fraction:
    ng = len(flags)
    if ng == 0:
        return Fraction(4)
    alpha = Fraction(sum(flags), ng)
    return 2 ** (max(nq, 5) - 1) * ng * (2 - alpha) / 2 + 4


def test_examples():
    assert cycle_count(5, [False] * 10)[0] == 164
    assert cycle_count(2, [False])[0] == 20
    cycles, seconds = cycle_count(16, [True, False] * 50)
    assert cycles == 2_457_604
    assert seconds == pytest.approx(24.57604e-3, rel=1e-12)


def test_nq_min():
    assert TimingModel().nq_min == 5
    assert TimingModel(n_pipe=4).nq_min == 4
    assert TimingModel(n_pipe=8).nq_min == 5
    assert TimingModel(n_pipe=9).nq_min == 6
    assert TimingModel(n_pipe=1).nq_min == 2


def test_gate_cycles():
    m = TimingModel()
    assert gate_cycles(16, False, m) == 1 << 15
    assert gate_cycles(16, True, m) == 1 << 14
    assert gate_cycles(1, True, m) == 8


def test_clock():
    m = TimingModel.from_clock_mhz(250)
    assert m.clock_period == pytest.approx(4e-9)
    assert cycle_count(5, [False], m)[1] == pytest.approx(20 * 4e-9)


def test_empty_and_invalid():
    assert cycle_count(3, []) == (4, pytest.approx(40e-9))
    with pytest.raises(ValueError):
        cycle_count(0, [])
    with pytest.raises(ValueError):
        TimingModel(n_pipe=0)


@given(st.integers(1, 16), st.lists(st.booleans(), max_size=300))
def test_matches_closed_form(nq, flags):
    assert cycle_count(nq, flags)[0] == closed_form(nq, flags)


def test_random_traces():
    rng = random.Random(11)
    for _ in range(1000):
        nq = rng.randint(1, 16)
        flags = [rng.random() < 0.4 for _ in range(rng.randint(1, 500))]
        assert Fraction(cycle_count(nq, flags)[0]) == closed_form(nq, flags)
