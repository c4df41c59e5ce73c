"""Instruction set: s-type (set qubit count), g-type (gate), r-type (read state).

Word layout, most significant field first::

    | opcode (5) | target (q) | control (q) | immediate (1 + frac_bits) |

With the default 4-bit qubit fields and 18 fractional bits this is exactly
32 bits. A g-type immediate is a two's-complement angle ``a`` in [-1, 1)
standing for ``a * pi``; an s-type immediate is the plain unsigned qubit
count; an r-type word carries only its opcode.
"""
from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable

from .fxp import FxFormat


class IsaError(ValueError):
    pass


class EncodingError(IsaError):
    def __init__(self, field_name: str, value, limit):
        super().__init__(f"field '{field_name}' value {value} does not fit ({limit})")
        self.field = field_name


class DecodeError(IsaError):
    pass


class ProgramError(IsaError):
    pass


class Opcode(enum.IntEnum):
    SET_NQ = 0x00
    READ_STATE = 0x01
    X = 0x02
    Y = 0x03
    Z = 0x04
    H = 0x05
    S = 0x06
    SDG = 0x07
    T = 0x08
    TDG = 0x09
    P = 0x0A
    RX = 0x0B
    RY = 0x0C
    RZ = 0x0D

    @property
    def kind(self) -> str:
        if self is Opcode.SET_NQ:
            return "s"
        if self is Opcode.READ_STATE:
            return "r"
        return "g"

    @property
    def is_gate(self) -> bool:
        return self.kind == "g"


GATE_OPCODES = tuple(op for op in Opcode if op.is_gate)

# Effective angle (in units of pi) fed to the trig unit for fixed gates.
FIXED_ANGLE = {
    Opcode.X: 0.5,
    Opcode.Y: 0.5,
    Opcode.Z: 0.5,
    Opcode.H: 0.25,
    Opcode.S: 0.5,
    Opcode.SDG: -0.5,
    Opcode.T: 0.25,
    Opcode.TDG: -0.25,
}

# Parametric gates: effective angle = scale * source angle.
ANGLE_SCALE = {
    Opcode.P: 1.0,
    Opcode.RX: 0.5,
    Opcode.RY: 0.5,
    Opcode.RZ: 0.5,
}


@dataclass(frozen=True)
class IsaConfig:
    frac_bits: int = 18
    qubit_bits: int = 4
    opcode_bits: int = 5
    int_bits: int = 2

    def __post_init__(self):
        if self.qubit_bits < 1 or self.frac_bits < 1:
            raise IsaError("qubit_bits and frac_bits must be positive")
        if len(Opcode) > (1 << self.opcode_bits):
            raise IsaError("opcode field too narrow for the opcode table")
        if self.width > 32:
            raise IsaError(f"instruction width {self.width} exceeds 32 bits")

    @classmethod
    def for_max_qubits(cls, max_qubits: int, frac_bits: int = 18) -> IsaConfig:
        qubit_bits = max(1, math.ceil(math.log2(max_qubits)))
        return cls(frac_bits=frac_bits, qubit_bits=qubit_bits)

    @property
    def imm_bits(self) -> int:
        return 1 + self.frac_bits

    @property
    def width(self) -> int:
        return self.opcode_bits + 2 * self.qubit_bits + self.imm_bits

    @property
    def max_qubits(self) -> int:
        return 1 << self.qubit_bits

    @property
    def amplitude_format(self) -> FxFormat:
        return FxFormat(self.int_bits, self.frac_bits)

    @property
    def angle_format(self) -> FxFormat:
        return FxFormat(1, self.frac_bits)


DEFAULT_CONFIG = IsaConfig()


@dataclass(frozen=True)
class Instruction:
    """One decoded instruction.

    ``imm`` is the raw immediate: signed angle word for g-type, qubit count
    for s-type, zero for r-type. ``control == target`` means uncontrolled.
    """

    opcode: Opcode
    target: int = 0
    control: int = 0
    imm: int = 0

    @property
    def controlled(self) -> bool:
        return self.opcode.is_gate and self.control != self.target

    def angle(self, cfg: IsaConfig = DEFAULT_CONFIG) -> float:
        """Immediate as a real multiple of pi."""
        return self.imm / (1 << cfg.frac_bits)

    @classmethod
    def set_nq(cls, nq: int) -> Instruction:
        return cls(Opcode.SET_NQ, 0, 0, nq)

    @classmethod
    def read_state(cls) -> Instruction:
        return cls(Opcode.READ_STATE)

    @classmethod
    def gate(cls, opcode: Opcode, target: int, control: int | None = None,
             imm: int | None = None, cfg: IsaConfig = DEFAULT_CONFIG) -> Instruction:
        """Build a g-type instruction; fixed gates get their constant immediate."""
        opcode = Opcode(opcode)
        if not opcode.is_gate:
            raise IsaError(f"{opcode.name} is not a gate opcode")
        if imm is None:
            if opcode not in FIXED_ANGLE:
                raise IsaError(f"{opcode.name} needs an explicit immediate")
            imm = round(FIXED_ANGLE[opcode] * (1 << cfg.frac_bits))
        return cls(opcode, target, target if control is None else control, imm)

    def __str__(self):
        if self.opcode is Opcode.SET_NQ:
            return f"SET_NQ {self.imm}"
        if self.opcode is Opcode.READ_STATE:
            return "READ_STATE"
        ctl = f" c={self.control}" if self.controlled else ""
        return f"{self.opcode.name} t={self.target}{ctl} imm={self.imm}"


def _check_field(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise EncodingError(name, value, f"[{lo}, {hi}]")


def encode_instruction(ins: Instruction, cfg: IsaConfig = DEFAULT_CONFIG) -> int:
    op = Opcode(ins.opcode)
    qmax = (1 << cfg.qubit_bits) - 1
    _check_field("target", ins.target, 0, qmax)
    _check_field("control", ins.control, 0, qmax)
    if op.kind == "g":
        _check_field("immediate", ins.imm, -(1 << cfg.frac_bits), (1 << cfg.frac_bits) - 1)
    elif op.kind == "s":
        _check_field("immediate", ins.imm, 0, (1 << cfg.imm_bits) - 1)
        if ins.target or ins.control:
            raise EncodingError("target", ins.target, "s-type target/control must be 0")
    else:
        if ins.target or ins.control or ins.imm:
            raise EncodingError("immediate", ins.imm, "r-type fields must be 0")

    imm_field = ins.imm & ((1 << cfg.imm_bits) - 1)
    word = int(op)
    word = (word << cfg.qubit_bits) | ins.target
    word = (word << cfg.qubit_bits) | ins.control
    word = (word << cfg.imm_bits) | imm_field
    return word


def decode_instruction(word: int, cfg: IsaConfig = DEFAULT_CONFIG) -> Instruction:
    if not 0 <= word < (1 << cfg.width):
        raise DecodeError(f"word 0x{word:x} wider than {cfg.width} bits")
    imm_field = word & ((1 << cfg.imm_bits) - 1)
    word >>= cfg.imm_bits
    control = word & ((1 << cfg.qubit_bits) - 1)
    word >>= cfg.qubit_bits
    target = word & ((1 << cfg.qubit_bits) - 1)
    code = word >> cfg.qubit_bits
    try:
        op = Opcode(code)
    except ValueError:
        raise DecodeError(f"unknown opcode 0x{code:02x}") from None

    if op.kind == "s":
        if target or control:
            raise DecodeError("s-type word with nonzero target/control")
        return Instruction(op, 0, 0, imm_field)
    if op.kind == "r":
        if target or control or imm_field:
            raise DecodeError("r-type word with nonzero operand fields")
        return Instruction(op)
    imm = imm_field - (1 << cfg.imm_bits) if imm_field >> cfg.frac_bits else imm_field
    return Instruction(op, target, control, imm)


@dataclass
class Program:
    qubit_count: int
    instructions: list[Instruction]
    source_map: list[int | None] = field(default_factory=list)
    config: IsaConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not self.source_map:
            self.source_map = [None] * len(self.instructions)
        if len(self.source_map) != len(self.instructions):
            raise ProgramError("source_map length differs from instruction count")

    def validate(self) -> None:
        ins = self.instructions
        if len(ins) < 2 or ins[0].opcode is not Opcode.SET_NQ:
            raise ProgramError("program must start with SET_NQ")
        if ins[-1].opcode is not Opcode.READ_STATE:
            raise ProgramError("program must end with READ_STATE")
        if sum(i.opcode is Opcode.SET_NQ for i in ins) != 1:
            raise ProgramError("exactly one SET_NQ is allowed")
        if sum(i.opcode is Opcode.READ_STATE for i in ins) != 1:
            raise ProgramError("exactly one READ_STATE is allowed")
        nq = ins[0].imm
        if nq != self.qubit_count:
            raise ProgramError(f"SET_NQ {nq} disagrees with qubit_count {self.qubit_count}")
        if not 1 <= nq <= self.config.max_qubits:
            raise ProgramError(f"qubit count {nq} outside [1, {self.config.max_qubits}]")
        for k, g in enumerate(ins[1:-1], start=1):
            if g.target >= nq or g.control >= nq:
                raise ProgramError(f"instruction {k} ({g}) addresses a qubit >= {nq}")

    @property
    def gates(self) -> list[Instruction]:
        return [i for i in self.instructions if i.opcode.is_gate]

    def words(self) -> list[int]:
        return [encode_instruction(i, self.config) for i in self.instructions]

    @classmethod
    def from_words(cls, words: Iterable[int], cfg: IsaConfig = DEFAULT_CONFIG) -> Program:
        ins = [decode_instruction(w, cfg) for w in words]
        nq = ins[0].imm if ins and ins[0].opcode is Opcode.SET_NQ else 0
        prog = cls(nq, ins, config=cfg)
        prog.validate()
        return prog


# --- binary container -------------------------------------------------------

MAGIC = b"QFXE"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBBBHI")


def write_ambin(prog: Program, fp: BinaryIO) -> None:
    cfg = prog.config
    words = prog.words()
    fp.write(_HEADER.pack(MAGIC, FORMAT_VERSION, cfg.int_bits, cfg.frac_bits,
                          cfg.qubit_bits, len(words)))
    fp.write(struct.pack(f"<{len(words)}I", *words))


def read_ambin(fp: BinaryIO) -> Program:
    head = fp.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise DecodeError("truncated header")
    magic, version, int_bits, frac_bits, qubit_bits, count = _HEADER.unpack(head)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DecodeError(f"unsupported format version {version}")
    body = fp.read(4 * count)
    if len(body) != 4 * count:
        raise DecodeError("truncated instruction stream")
    cfg = IsaConfig(frac_bits=frac_bits, qubit_bits=qubit_bits, int_bits=int_bits)
    return Program.from_words(struct.unpack(f"<{count}I", body), cfg)


def save_ambin(prog: Program, path: str | Path) -> None:
    with open(path, "wb") as fp:
        write_ambin(prog, fp)


def load_ambin(path: str | Path) -> Program:
    with open(path, "rb") as fp:
        return read_ambin(fp)


# --- text listing -----------------------------------------------------------

def format_listing(prog: Program, sources: list[str] | None = None) -> str:
    """One line per instruction: ``OPCODE tgt ctl imm_hex # source``.

    ``sources`` optionally holds the QASM text lines for the comment column.
    """
    cfg = prog.config
    mask = (1 << cfg.imm_bits) - 1
    lines = []
    for ins, origin in zip(prog.instructions, prog.source_map):
        comment = ""
        if origin is not None:
            comment = f"line {origin}"
            if sources and 0 < origin <= len(sources):
                comment += f": {sources[origin - 1].strip()}"
        lines.append(f"{ins.opcode.name} {ins.target} {ins.control} "
                     f"0x{ins.imm & mask:0{(cfg.imm_bits + 3) // 4}x} # {comment}".rstrip())
    return "\n".join(lines) + "\n"


def parse_listing(text: str, cfg: IsaConfig = DEFAULT_CONFIG) -> Program:
    words = []
    for n, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 4:
            raise DecodeError(f"listing line {n}: expected 4 fields, got {len(parts)}")
        try:
            op = Opcode[parts[0]]
        except KeyError:
            raise DecodeError(f"listing line {n}: unknown opcode {parts[0]}") from None
        tgt, ctl, imm = int(parts[1]), int(parts[2]), int(parts[3], 16)
        _check_field("target", tgt, 0, (1 << cfg.qubit_bits) - 1)
        _check_field("control", ctl, 0, (1 << cfg.qubit_bits) - 1)
        _check_field("immediate", imm, 0, (1 << cfg.imm_bits) - 1)
        word = (((int(op) << cfg.qubit_bits | tgt) << cfg.qubit_bits | ctl)
                << cfg.imm_bits) | imm
        words.append(word)
    return Program.from_words(words, cfg)
