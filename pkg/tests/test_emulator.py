import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfxemu.compiler import compile_qasm
from qfxemu.emulator import (
    EmulatorError, FxStateVector, apply_gate, butterfly_pairs, pair_indices, read_state, run,
    state_csv, state_json,
)
from qfxemu.gates import GATE_TABLE, IM_I, RE_I, GateTableEntry
from qfxemu.isa import GATE_OPCODES, Instruction, Opcode, Program
from qfxemu.oracle import simulate_program

ONE = 1 << 18
H_RAW = 185364


def program(nq, *gates):
    return Program(nq, [Instruction.set_nq(nq), *gates, Instruction.read_state()])


def g(op, t, c=None, imm=None):
    return Instruction.gate(op, t, c, imm)


def test_pair_examples():
    assert list(butterfly_pairs(2, 0)) == [(0, 1), (2, 3)]
    assert list(butterfly_pairs(2, 1)) == [(0, 2), (1, 3)]
    assert list(butterfly_pairs(2, 0, 1)) == [(2, 3)]


def test_pair_errors():
    with pytest.raises(EmulatorError):
        pair_indices(2, 2)
    with pytest.raises(EmulatorError):
        pair_indices(2, 0, 0)
    with pytest.raises(EmulatorError):
        pair_indices(2, 0, 5)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(0, n - 1), st.none() | st.integers(0, n - 1))))
def test_pairs_disjoint(args):
    nq, target, control = args
    if control == target:
        control = None
    i, j = pair_indices(nq, target, control)
    both = np.concatenate([i, j])
    assert len(set(both.tolist())) == both.size
    assert np.all(j - i == 1 << target)
    expected = 1 << nq if control is None else 1 << (nq - 1)
    assert both.size == expected


def test_h_on_zero(tu):
    s = FxStateVector.zero_state(1)
    assert apply_gate(s, g(Opcode.H, 0), tu) == 0
    assert read_state(s) == [(0, H_RAW, 0), (1, H_RAW, 0)]


def test_x_on_zero(tu):
    s = FxStateVector.zero_state(1)
    apply_gate(s, g(Opcode.X, 0), tu)
    assert read_state(s) == [(0, 0, 0), (1, ONE, 0)]


def test_cx_truth_table(tu):
    s = FxStateVector.zero_state(2)
    s.re[:] = [0, ONE, 0, 0]
    apply_gate(s, g(Opcode.X, 1, 0), tu)
    assert s.re.tolist() == [0, 0, 0, ONE]
    s.re[:] = [0, 0, ONE, 0]
    apply_gate(s, g(Opcode.X, 1, 0), tu)
    assert s.re.tolist() == [0, 0, ONE, 0]


def test_y_and_z_exact(tu):
    s = FxStateVector.zero_state(1)
    apply_gate(s, g(Opcode.Y, 0), tu)
    assert read_state(s) == [(0, 0, 0), (1, 0, ONE)]
    apply_gate(s, g(Opcode.Z, 0), tu)
    assert read_state(s) == [(0, 0, 0), (1, 0, -ONE)]


def test_s_multiplies_one_by_i(tu):
    s = FxStateVector.zero_state(1)
    s.re[:] = [0, ONE]
    apply_gate(s, g(Opcode.S, 0), tu)
    assert read_state(s) == [(0, 0, 0), (1, 0, ONE)]


def test_bell_run():
    report = run(program(2, g(Opcode.H, 0), g(Opcode.X, 1, 0)))
    assert read_state(report) == [(0, H_RAW, 0), (1, 0, 0), (2, 0, 0), (3, H_RAW, 0)]
    assert report.gate_count == 2 and report.controlled_count == 1
    assert report.cycles == 16 + 8 + 4


def test_initial_state_run():
    assert read_state(run(program(1))) == [(0, ONE, 0), (1, 0, 0)]


def test_x_twice_restores():
    report = run(program(3, g(Opcode.X, 0), g(Opcode.X, 0)))
    assert report.state.re.tolist() == [ONE] + [0] * 7
    assert not report.state.im.any()


def test_row_count():
    for nq in (1, 3, 6):
        assert len(read_state(run(program(nq)))) == 1 << nq


def random_state(nq, rng, scale=0.9):
    v = rng.normal(size=1 << nq) + 1j * rng.normal(size=1 << nq)
    v *= scale / np.linalg.norm(v)
    re = np.round(v.real * ONE).astype(np.int32)
    im = np.round(v.imag * ONE).astype(np.int32)
    return FxStateVector(nq, re, im)


@pytest.mark.parametrize("forward, inverse", [
    (Opcode.X, Opcode.X), (Opcode.Z, Opcode.Z), (Opcode.Y, Opcode.Y),
    (Opcode.S, Opcode.SDG), (Opcode.SDG, Opcode.S),
])
@pytest.mark.parametrize("control", [None, 0])
def test_exact_inverse_pairs(tu, forward, inverse, control):
    rng = np.random.default_rng(int(forward) * 7 + (control is None))
    s = random_state(3, rng)
    before = s.copy()
    apply_gate(s, g(forward, 2, control), tu)
    apply_gate(s, g(inverse, 2, control), tu)
    assert np.array_equal(s.re, before.re) and np.array_equal(s.im, before.im)


def test_t_tdg_restore_basis_states(tu):
    # sin/cos(pi/4) are not exact, so only the held half and exact inputs survive bit for bit
    s = FxStateVector.zero_state(2)
    apply_gate(s, g(Opcode.T, 0), tu)
    apply_gate(s, g(Opcode.TDG, 0), tu)
    assert read_state(s) == read_state(FxStateVector.zero_state(2))


def test_t_tdg_round_trip_within_lsbs(tu):
    rng = np.random.default_rng(3)
    s = random_state(4, rng)
    before = s.copy()
    apply_gate(s, g(Opcode.T, 1), tu)
    apply_gate(s, g(Opcode.TDG, 1), tu)
    assert np.abs(s.re - before.re).max() <= 4
    assert np.abs(s.im - before.im).max() <= 4


def test_saturation_is_reported(tu):
    s = FxStateVector.zero_state(1)
    s.re[:] = [int(1.9 * ONE), int(1.9 * ONE)]
    n = apply_gate(s, g(Opcode.H, 0), tu)
    assert n >= 1
    assert s.re[0] == (1 << 19) - 1


def test_run_collects_saturation_events(caplog):
    assert not run(program(1, g(Opcode.H, 0))).saturated
    # a non-unitary table entry that grows |c| by sqrt(2) per application
    grow = GateTableEntry((RE_I, IM_I, RE_I, IM_I), (RE_I, IM_I, RE_I, IM_I))
    table = {**GATE_TABLE, Opcode.H: grow}
    with caplog.at_level("WARNING"):
        report = run(program(1, g(Opcode.H, 0), g(Opcode.H, 0)), table=table)
    assert report.saturated
    assert [e.instruction_index for e in report.saturation_events] == [2]
    assert "saturated" in caplog.text


def test_invalid_program():
    with pytest.raises(EmulatorError):
        run(Program(2, [Instruction.set_nq(2), g(Opcode.H, 0)]))


def test_non_gate_rejected(tu):
    with pytest.raises(EmulatorError):
        apply_gate(FxStateVector.zero_state(1), Instruction.read_state(), tu)


def test_storage_layout():
    s = FxStateVector.zero_state(10)
    assert s.word_count == 2 * 1024
    assert s.storage_bits == 2 * 1024 * 20
    assert s.re.dtype == np.int32


@pytest.mark.parametrize("op", GATE_OPCODES)
def test_each_opcode_tracks_oracle(tu, op):
    rng = np.random.default_rng(int(op))
    gates = []
    for _ in range(30):
        t, c = rng.choice(4, 2, replace=False)
        imm = int(rng.integers(-ONE, ONE))
        ctl = int(c) if rng.random() < 0.4 else None
        gates.append(g(op, int(t), ctl, None if op.name in
                       ("X", "Y", "Z", "H", "S", "SDG", "T", "TDG") else imm))
    gates.insert(0, g(Opcode.H, 0))
    gates.insert(1, g(Opcode.H, 2))
    prog = program(4, *gates)
    fx = run(prog, tu).state.to_complex()
    ref = simulate_program(prog).amps
    assert np.abs(fx - ref).max() <= 2.0 ** -10


def test_norm_drift_on_corpus(corpus, tu):
    for name, src in corpus.items():
        prog = compile_qasm(src)
        n = len(prog.gates)
        drift = abs(run(prog, tu).state.norm_squared() - 1.0)
        assert drift <= 2.0 ** -12 * max(n, 1), name


def test_fx_matches_oracle_on_corpus(corpus, tu):
    for name, src in corpus.items():
        prog = compile_qasm(src)
        if len(prog.gates) > 200:
            continue
        fx = run(prog, tu).state.to_complex()
        ref = simulate_program(prog).amps
        assert np.abs(fx - ref).max() <= 2.0 ** -10, name


def test_dumps():
    state = run(program(1, g(Opcode.X, 0))).state
    lines = state_csv(state).splitlines()
    assert lines[0] == "index,re_raw,im_raw,re_real,im_real"
    assert lines[2] == "1,262144,0,1.0,0.0"
    doc = json.loads(state_json(state))
    assert doc["nq"] == 1
    assert doc["amplitudes"][1]["re_raw"] == ONE
