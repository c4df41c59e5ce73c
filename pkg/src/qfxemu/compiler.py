"""Lower an OpenQASM 2.0 circuit to an instruction program.

Gates with a direct hardware counterpart map one to one; controlled
versions use the control field. Everything else is expanded through its
qelib1 (or user) definition down to ``U`` and ``CX``; ``U(theta, phi, lam)``
becomes ``RZ(lam)``, ``RY(theta)``, ``RZ(phi)`` in that order, dropping the
global phase. Only uncontrolled single-qubit gates ever pass through that
rewrite, so the dropped phase is global to the whole circuit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .isa import (ANGLE_SCALE, DEFAULT_CONFIG, FIXED_ANGLE, Instruction, IsaConfig,
                  Opcode, Program)
from .qasm import (Barrier, CircuitAst, If, Measure, QasmError, QasmSemanticError,
                   Reset, parse_qasm)


class UnsupportedError(QasmError):
    pass


class TerminalMeasurementWarning(UserWarning):
    pass


# qelib1 name -> (opcode, controlled); parametric opcodes take the single parameter
NATIVE = {
    "x": (Opcode.X, False), "y": (Opcode.Y, False), "z": (Opcode.Z, False),
    "h": (Opcode.H, False), "s": (Opcode.S, False), "sdg": (Opcode.SDG, False),
    "t": (Opcode.T, False), "tdg": (Opcode.TDG, False),
    "p": (Opcode.P, False), "u1": (Opcode.P, False),
    "rx": (Opcode.RX, False), "ry": (Opcode.RY, False), "rz": (Opcode.RZ, False),
    "cx": (Opcode.X, True), "cy": (Opcode.Y, True), "cz": (Opcode.Z, True),
    "ch": (Opcode.H, True),
    "cp": (Opcode.P, True), "cu1": (Opcode.P, True),
    "crx": (Opcode.RX, True), "cry": (Opcode.RY, True), "crz": (Opcode.RZ, True),
}
_DROPPED = {"id", "u0"}


@dataclass(frozen=True)
class LoweredGate:
    """A g-type operation before angle quantization.

    ``angle`` is the effective trig-unit angle in units of pi, folded into
    [-1, 1).
    """

    opcode: Opcode
    target: int
    control: int | None
    angle: float
    line: int = 0

    @property
    def controlled(self) -> bool:
        return self.control is not None


def fold_turns(x: float) -> float:
    """Fold a multiple of pi into [-1, 1) (angles are 2*pi periodic)."""
    y = math.fmod(x + 1.0, 2.0)
    if y < 0:
        y += 2.0
    return y - 1.0


def quantize_turns(x: float, frac_bits: int = 18) -> int:
    """Fold then round-to-nearest-even onto the immediate grid."""
    if not math.isfinite(x):
        raise ValueError(f"angle {x} is not finite")
    raw = round(fold_turns(x) * (1 << frac_bits))
    # +1.0 is unrepresentable; it is the same point as -1.0
    if raw == 1 << frac_bits:
        raw = -raw
    return raw


def quantize_angle(theta: float, frac_bits: int = 18) -> int:
    """Immediate raw word for an angle in radians."""
    return quantize_turns(theta / math.pi, frac_bits)


def _effective(opcode: Opcode, params: list[float]) -> float:
    if opcode in FIXED_ANGLE:
        return FIXED_ANGLE[opcode]
    return fold_turns(ANGLE_SCALE[opcode] * params[0] / math.pi)


class _Lowerer:
    def __init__(self, ast: CircuitAst):
        self.ast = ast
        self.out: list[LoweredGate] = []
        self.offsets = ast.qubit_offsets()

    def qubit(self, reg: str, index: int) -> int:
        return self.offsets[reg] + index

    def expand_args(self, args) -> list[list[int]]:
        """Resolve (possibly whole-register) operands into per-call qubit lists."""
        width = 1
        for a in args:
            if a.index is None:
                width = self.ast.qregs[a.reg]
        rows = []
        for k in range(width):
            rows.append([self.qubit(a.reg, k if a.index is None else a.index)
                         for a in args])
        return rows

    def emit(self, name: str, params: list[float], qubits: list[int], line: int) -> None:
        if name == "U":
            self.emit_u(*params, qubits[0], line)
            return
        if name == "CX":
            self.out.append(LoweredGate(Opcode.X, qubits[1], qubits[0], 0.5, line))
            return
        gdef = self.ast.gates[name]
        if gdef.builtin and name in NATIVE:
            opcode, controlled = NATIVE[name]
            angle = _effective(opcode, params)
            if controlled:
                self.out.append(LoweredGate(opcode, qubits[1], qubits[0], angle, line))
            else:
                self.out.append(LoweredGate(opcode, qubits[0], None, angle, line))
            return
        if gdef.builtin and name in _DROPPED:
            return
        if gdef.opaque:
            raise UnsupportedError(f"opaque gate '{name}' has no definition", line)
        env = dict(zip(gdef.params, params))
        bind = dict(zip(gdef.qargs, qubits))
        for stmt in gdef.body:
            if isinstance(stmt, Barrier):
                continue
            sub_params = [e.evaluate(env) for e in stmt.params]
            self.emit(stmt.name, sub_params, [bind[a.reg] for a in stmt.args], line)

    def emit_u(self, theta: float, phi: float, lam: float, q: int, line: int) -> None:
        for opcode, value in ((Opcode.RZ, lam), (Opcode.RY, theta), (Opcode.RZ, phi)):
            angle = _effective(opcode, [value])
            if angle != 0.0:
                self.out.append(LoweredGate(opcode, q, None, angle, line))

    def run(self) -> list[LoweredGate]:
        measured: set[int] = set()
        for stmt in self.ast.statements:
            if isinstance(stmt, Barrier):
                continue
            if isinstance(stmt, If):
                raise UnsupportedError("classically controlled operations are not supported",
                                       stmt.line, stmt.col)
            if isinstance(stmt, Reset):
                raise UnsupportedError("reset is not supported", stmt.line, stmt.col)
            if isinstance(stmt, Measure):
                for row in self.expand_args((stmt.qubit,)):
                    measured.update(row)
                continue
            for row in self.expand_args(stmt.args):
                hit = measured.intersection(row)
                if hit:
                    raise UnsupportedError(
                        f"gate '{stmt.name}' acts on measured qubit(s) {sorted(hit)}: "
                        "mid-circuit measurement is not supported", stmt.line, stmt.col)
                params = [e.evaluate() for e in stmt.params]
                self.emit(stmt.name, params, row, stmt.line)
        if measured:
            warnings.warn(f"dropping terminal measurement of {len(measured)} qubit(s); "
                          "the emulator returns amplitudes", TerminalMeasurementWarning,
                          stacklevel=3)
        return self.out


def lower_gates(ast: CircuitAst) -> list[LoweredGate]:
    return _Lowerer(ast).run()


def to_instruction(g: LoweredGate, cfg: IsaConfig = DEFAULT_CONFIG) -> Instruction:
    imm = quantize_turns(g.angle, cfg.frac_bits)
    return Instruction(g.opcode, g.target, g.target if g.control is None else g.control, imm)


def lower(ast: CircuitAst, cfg: IsaConfig = DEFAULT_CONFIG) -> Program:
    nq = ast.num_qubits
    if nq < 1:
        raise QasmSemanticError("circuit declares no qubits")
    if nq > cfg.max_qubits:
        raise QasmSemanticError(f"circuit needs {nq} qubits; the target supports "
                                f"{cfg.max_qubits}")
    gates = lower_gates(ast)
    instructions = [Instruction.set_nq(nq)]
    lines: list[int | None] = [None]
    for g in gates:
        instructions.append(to_instruction(g, cfg))
        lines.append(g.line)
    instructions.append(Instruction.read_state())
    lines.append(None)
    prog = Program(nq, instructions, lines, cfg)
    prog.validate()
    return prog


def compile_qasm(source: str, cfg: IsaConfig = DEFAULT_CONFIG) -> Program:
    return lower(parse_qasm(source, max_qubits=cfg.max_qubits), cfg)
