import io
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfxemu.isa import (
    DEFAULT_CONFIG, GATE_OPCODES, DecodeError, EncodingError, Instruction, IsaConfig,
    IsaError, Opcode, Program, ProgramError, decode_instruction, encode_instruction,
    format_listing, parse_listing, read_ambin, write_ambin,
)


def bell() -> Program:
    return Program(2, [Instruction.set_nq(2), Instruction.gate(Opcode.H, 0),
                       Instruction.gate(Opcode.X, 1, 0), Instruction.read_state()],
                   source_map=[2, 3, 4, None])


def test_default_layout():
    assert DEFAULT_CONFIG.width == 32
    assert DEFAULT_CONFIG.imm_bits == 19
    assert DEFAULT_CONFIG.max_qubits == 16
    assert DEFAULT_CONFIG.amplitude_format.width == 20


def test_config_width_limit():
    with pytest.raises(IsaError):
        IsaConfig(frac_bits=20)
    assert IsaConfig.for_max_qubits(8).qubit_bits == 3
    assert IsaConfig.for_max_qubits(8).width == 30


def test_h_word():
    word = encode_instruction(Instruction.gate(Opcode.H, 0))
    assert word == (int(Opcode.H) << 27) | 0b0010000000000000000
    assert word & 0x7FFFF == 65536


def test_set_nq_word():
    assert encode_instruction(Instruction.set_nq(16)) == 16


def test_zero_word_is_set_nq_zero():
    assert decode_instruction(0) == Instruction(Opcode.SET_NQ, 0, 0, 0)


def test_fixed_immediates():
    expected = {Opcode.X: 131072, Opcode.Y: 131072, Opcode.Z: 131072, Opcode.H: 65536,
                Opcode.S: 131072, Opcode.SDG: -131072, Opcode.T: 65536, Opcode.TDG: -65536}
    for op, imm in expected.items():
        assert Instruction.gate(op, 0).imm == imm


def test_parametric_needs_immediate():
    with pytest.raises(IsaError):
        Instruction.gate(Opcode.RZ, 0)
    with pytest.raises(IsaError):
        Instruction.gate(Opcode.SET_NQ, 0)


def test_control_equal_target_means_uncontrolled():
    ins = decode_instruction(encode_instruction(Instruction(Opcode.X, 3, 3, 0)))
    assert not ins.controlled
    assert Instruction.gate(Opcode.X, 1, 0).controlled


@pytest.mark.parametrize("ins, field", [
    (Instruction(Opcode.X, 16, 0, 0), "target"),
    (Instruction(Opcode.X, 0, 16, 0), "control"),
    (Instruction(Opcode.RZ, 0, 0, 1 << 18), "immediate"),
    (Instruction(Opcode.RZ, 0, 0, -(1 << 18) - 1), "immediate"),
    (Instruction(Opcode.SET_NQ, 0, 0, 1 << 19), "immediate"),
    (Instruction(Opcode.READ_STATE, 0, 0, 5), "immediate"),
])
def test_encoding_error_names_field(ins, field):
    with pytest.raises(EncodingError) as err:
        encode_instruction(ins)
    assert err.value.field == field


def test_decode_errors():
    with pytest.raises(DecodeError):
        decode_instruction(0x1F << 27)
    with pytest.raises(DecodeError):
        decode_instruction(1 << 32)
    with pytest.raises(DecodeError):
        decode_instruction((int(Opcode.READ_STATE) << 27) | 1)
    with pytest.raises(DecodeError):
        decode_instruction(1 << 23)


instructions = st.one_of(
    st.builds(Instruction, st.sampled_from(GATE_OPCODES), st.integers(0, 15),
              st.integers(0, 15), st.integers(-(1 << 18), (1 << 18) - 1)),
    st.builds(Instruction.set_nq, st.integers(0, (1 << 19) - 1)),
    st.just(Instruction.read_state()),
)


@given(instructions)
def test_roundtrip_property(ins):
    word = encode_instruction(ins)
    assert 0 <= word < 1 << 32
    assert decode_instruction(word) == ins


def test_roundtrip_10k_random():
    rng = np.random.default_rng(2024)
    ops = rng.choice(np.array([int(o) for o in GATE_OPCODES]), 10_000)
    tgt = rng.integers(0, 16, 10_000)
    ctl = rng.integers(0, 16, 10_000)
    imm = rng.integers(-(1 << 18), 1 << 18, 10_000)
    for o, t, c, m in zip(ops, tgt, ctl, imm):
        ins = Instruction(Opcode(int(o)), int(t), int(c), int(m))
        assert decode_instruction(encode_instruction(ins)) == ins


def test_program_validate():
    bell().validate()
    bad = [
        Program(2, [Instruction.gate(Opcode.H, 0), Instruction.read_state()]),
        Program(2, [Instruction.set_nq(2), Instruction.gate(Opcode.H, 0)]),
        Program(3, [Instruction.set_nq(2), Instruction.read_state()]),
        Program(2, [Instruction.set_nq(2), Instruction.gate(Opcode.H, 2),
                    Instruction.read_state()]),
        Program(0, [Instruction.set_nq(0), Instruction.read_state()]),
        Program(2, [Instruction.set_nq(2), Instruction.set_nq(2), Instruction.read_state()]),
    ]
    for prog in bad:
        with pytest.raises(ProgramError):
            prog.validate()


def test_ambin_roundtrip_and_header():
    prog = bell()
    buf = io.BytesIO()
    write_ambin(prog, buf)
    data = buf.getvalue()
    assert data[:4] == b"QFXE"
    assert len(data) == 13 + 4 * 4
    (first,) = struct.unpack_from("<I", data, 13)
    assert first == 2
    back = read_ambin(io.BytesIO(data))
    assert back.instructions == prog.instructions
    assert back.words() == prog.words()


def test_ambin_rejects_garbage():
    with pytest.raises(DecodeError):
        read_ambin(io.BytesIO(b"NOPE" + bytes(20)))
    with pytest.raises(DecodeError):
        read_ambin(io.BytesIO(b"QFXE"))
    buf = io.BytesIO()
    write_ambin(bell(), buf)
    with pytest.raises(DecodeError):
        read_ambin(io.BytesIO(buf.getvalue()[:-2]))


def test_listing_roundtrip():
    prog = bell()
    text = format_listing(prog, ["OPENQASM 2.0;", "h q[0];", "h q[0];", "cx q[0],q[1];"])
    lines = text.splitlines()
    assert lines[0].startswith("SET_NQ 0 0 0x00002")
    assert lines[1] == "H 0 0 0x10000 # line 3: h q[0];"
    assert lines[2].startswith("X 1 0 0x20000")
    assert parse_listing(text).instructions == prog.instructions


def test_listing_negative_immediate():
    prog = Program(1, [Instruction.set_nq(1), Instruction.gate(Opcode.TDG, 0),
                       Instruction.read_state()])
    text = format_listing(prog)
    assert "0x70000" in text
    assert parse_listing(text).instructions[1].imm == -65536


def test_listing_errors():
    with pytest.raises(DecodeError):
        parse_listing("FOO 0 0 0x0\n")
    with pytest.raises(DecodeError):
        parse_listing("H 0 0\n")
    with pytest.raises(EncodingError):
        parse_listing("SET_NQ 0 0 0x1\nH 17 0 0x10000\nREAD_STATE 0 0 0x0\n")
