"""Per-opcode operand selection for the unified two-amplitude datapath.

Every gate updates a pair ``(c_i, c_j)`` with::

    out = sin_src * sin(theta) + cos_src * cos(theta)

for each of the four output words ``(Re_i', Im_i', Re_j', Im_j')``. A source
is one of the four input words, optionally negated, or zero. It is written
as a signed code: ``+-1`` Re_i, ``+-2`` Im_i, ``+-3`` Re_j, ``+-4`` Im_j,
``0`` for zero.

A pass-through output (coefficient exactly 1) cannot be formed when both
sin and cos are nonzero, so each half of the pair also has a hold flag that
copies its inputs unchanged. Phase gates use it on ``c_i``, which is what
makes control filtering produce true controlled-phase gates.
"""
from __future__ import annotations

from dataclasses import dataclass

from .isa import Opcode

ZERO, RE_I, IM_I, RE_J, IM_J = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class GateTableEntry:
    sin_src: tuple[int, int, int, int]
    cos_src: tuple[int, int, int, int]
    hold_i: bool = False
    hold_j: bool = False


def _phase_on_j() -> GateTableEntry:
    # c_j * e^{i t}: Re = -Im_j s + Re_j c, Im = Re_j s + Im_j c
    return GateTableEntry((0, 0, -IM_J, RE_J), (0, 0, RE_J, IM_J), hold_i=True)


GATE_TABLE: dict[Opcode, GateTableEntry] = {
    # swap: c_i' = c_j, c_j' = c_i
    Opcode.X: GateTableEntry((RE_J, IM_J, RE_I, IM_I), (0, 0, 0, 0)),
    # c_i' = -i c_j, c_j' = i c_i
    Opcode.Y: GateTableEntry((IM_J, -RE_J, -IM_I, RE_I), (0, 0, 0, 0)),
    Opcode.Z: GateTableEntry((0, 0, -RE_J, -IM_J), (0, 0, 0, 0), hold_i=True),
    # sin = cos = 1/sqrt2: sum and difference
    Opcode.H: GateTableEntry((RE_I, IM_I, RE_I, IM_I), (RE_J, IM_J, -RE_J, -IM_J)),
    Opcode.S: _phase_on_j(),
    Opcode.SDG: _phase_on_j(),
    Opcode.T: _phase_on_j(),
    Opcode.TDG: _phase_on_j(),
    Opcode.P: _phase_on_j(),
    # [[c, -i s], [-i s, c]]
    Opcode.RX: GateTableEntry((IM_J, -RE_J, IM_I, -RE_I), (RE_I, IM_I, RE_J, IM_J)),
    # [[c, -s], [s, c]]
    Opcode.RY: GateTableEntry((-RE_J, -IM_J, RE_I, IM_I), (RE_I, IM_I, RE_J, IM_J)),
    # diag(e^{-i t}, e^{i t})
    Opcode.RZ: GateTableEntry((IM_I, -RE_I, -IM_J, RE_J), (RE_I, IM_I, RE_J, IM_J)),
}

