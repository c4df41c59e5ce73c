"""Bit-accurate emulation of a fixed-point quantum-circuit accelerator.

Typical flow::

    from qfxemu import compile_qasm, run, verify
    prog = compile_qasm(open("bell.qasm").read())
    report = run(prog)
    print(verify(open("bell.qasm").read()).summary())
"""
from .compiler import compile_qasm, lower, lower_gates, quantize_angle
from .emulator import FxStateVector, apply_gate, butterfly_pairs, read_state, run
from .fxp import Fx, FxFormat, Q2_18
from .gcd import GcdReport, gcd_distance
from .harness import corpus_generate, verify
from .isa import (Instruction, IsaConfig, Opcode, Program, decode_instruction,
                  encode_instruction)
from .qasm import parse_qasm
from .timing import TimingModel, cycle_count
from .trig import TrigConfig, TrigUnit

__all__ = [
    "Fx", "FxFormat", "FxStateVector", "GcdReport", "Instruction", "IsaConfig", "Opcode",
    "Program", "Q2_18", "TimingModel", "TrigConfig", "TrigUnit", "apply_gate",
    "butterfly_pairs", "compile_qasm", "corpus_generate", "cycle_count",
    "decode_instruction", "encode_instruction", "gcd_distance", "lower", "lower_gates",
    "parse_qasm", "quantize_angle", "read_state", "run", "verify",
]
