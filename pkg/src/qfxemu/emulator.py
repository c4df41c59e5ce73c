"""Fixed-point state-vector emulator.

The pieces mirror the hardware blocks: :func:`pair_indices` is the state
selector (butterfly pairing with control filtering), :func:`apply_gate` the
arithmetic unit driven by :data:`~qfxemu.gates.GATE_TABLE`,
:class:`FxStateVector` the state register file and :func:`run` the control
unit sequencing a program. Timing is the closed-form model in
:mod:`qfxemu.timing`.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from . import fxp
from .fxp import FxFormat
from .gates import GATE_TABLE, GateTableEntry
from .isa import DEFAULT_CONFIG, Instruction, IsaConfig, Opcode, Program, ProgramError
from .timing import TimingModel, cycle_count
from .trig import TrigConfig, TrigUnit, trig_unit

log = logging.getLogger(__name__)


class EmulatorError(RuntimeError):
    pass


def _check_qubits(nq: int, target: int, control: int | None) -> None:
    if not 0 <= target < nq:
        raise EmulatorError(f"target {target} out of range for {nq} qubits")
    if control is not None:
        if not 0 <= control < nq:
            raise EmulatorError(f"control {control} out of range for {nq} qubits")
        if control == target:
            raise EmulatorError("control must differ from target")


def pair_indices(nq: int, target: int, control: int | None = None):
    """Arrays ``(i, j)`` of interacting amplitude indices, ascending in ``i``.

    ``i`` ranges over indices with the target bit clear, ``j = i | 1 << target``.
    With a control qubit only pairs whose control bit is set survive.
    """
    _check_qubits(nq, target, control)
    k = np.arange(1 << (nq - 1), dtype=np.int64)
    low = k & ((1 << target) - 1)
    i = ((k >> target) << (target + 1)) | low
    if control is not None:
        i = i[(i >> control) & 1 == 1]
    return i, i | (1 << target)


def butterfly_pairs(nq: int, target: int, control: int | None = None) -> Iterator[tuple[int, int]]:
    i, j = pair_indices(nq, target, control)
    return zip(i.tolist(), j.tolist())


@dataclass
class FxStateVector:
    """Real and imaginary raw words, 2**nq of each, stored as int32."""

    nq: int
    re: np.ndarray
    im: np.ndarray
    fmt: FxFormat = fxp.Q2_18

    @classmethod
    def zero_state(cls, nq: int, fmt: FxFormat = fxp.Q2_18) -> FxStateVector:
        re = np.zeros(1 << nq, dtype=np.int32)
        im = np.zeros(1 << nq, dtype=np.int32)
        re[0] = fmt.one
        return cls(nq, re, im, fmt)

    def __len__(self):
        return 1 << self.nq

    @property
    def word_count(self) -> int:
        return self.re.size + self.im.size

    @property
    def storage_bits(self) -> int:
        return self.word_count * self.fmt.width

    def to_complex(self) -> np.ndarray:
        lsb = self.fmt.lsb
        return self.re.astype(np.float64) * lsb + 1j * (self.im.astype(np.float64) * lsb)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.to_complex()) ** 2))

    def copy(self) -> FxStateVector:
        return FxStateVector(self.nq, self.re.copy(), self.im.copy(), self.fmt)


@dataclass
class SaturationEvent:
    instruction_index: int
    instruction: Instruction
    count: int


def _gate_fields(ins: Instruction) -> tuple[int, int | None]:
    return ins.target, (ins.control if ins.controlled else None)


def apply_gate(state: FxStateVector, ins: Instruction, tu: TrigUnit | None = None,
               table: Mapping[Opcode, GateTableEntry] = GATE_TABLE) -> int:
    """Update ``state`` in place. Returns the number of saturated output words."""
    if not ins.opcode.is_gate:
        raise EmulatorError(f"{ins.opcode.name} is not a g-type instruction")
    target, control = _gate_fields(ins)
    _check_qubits(state.nq, target, control)
    tu = tu or trig_unit(TrigConfig(frac_bits=state.fmt.frac_bits))
    entry = table[ins.opcode]
    fmt = state.fmt

    sin, cos = tu.sincos_raw(ins.imm)
    i, j = pair_indices(state.nq, target, control)
    words = (state.re[i].astype(np.int64), state.im[i].astype(np.int64),
             state.re[j].astype(np.int64), state.im[j].astype(np.int64))

    saturated = 0
    outputs = []
    for k in range(4):
        acc = None
        for code, trig in ((entry.sin_src[k], sin), (entry.cos_src[k], cos)):
            if code == 0:
                continue
            src = words[abs(code) - 1]
            if code < 0:
                src, sat = fxp.neg_raw(src, fmt)
                saturated += int(sat.sum())
            prod, sat = fxp.mul_raw(src, trig, fmt)
            saturated += int(sat.sum())
            if acc is None:
                acc = prod
            else:
                acc, sat = fxp.add_raw(acc, prod, fmt)
                saturated += int(sat.sum())
        outputs.append(np.zeros_like(words[0]) if acc is None else acc)

    if not entry.hold_i:
        state.re[i] = outputs[0]
        state.im[i] = outputs[1]
    if not entry.hold_j:
        state.re[j] = outputs[2]
        state.im[j] = outputs[3]
    return saturated


@dataclass
class EmulationReport:
    state: FxStateVector
    cycles: int
    seconds: float
    saturation_events: list[SaturationEvent] = field(default_factory=list)
    gate_count: int = 0
    controlled_count: int = 0

    @property
    def saturated(self) -> bool:
        return bool(self.saturation_events)


def run(program: Program, tu: TrigUnit | None = None,
        timing: TimingModel | None = None,
        table: Mapping[Opcode, GateTableEntry] = GATE_TABLE) -> EmulationReport:
    try:
        program.validate()
    except ProgramError as exc:
        raise EmulatorError(f"invalid program: {exc}") from exc
    cfg: IsaConfig = program.config or DEFAULT_CONFIG
    fmt = cfg.amplitude_format
    tu = tu or trig_unit(TrigConfig(frac_bits=cfg.frac_bits))
    if tu.config.frac_bits != cfg.frac_bits:
        raise EmulatorError("trig unit precision differs from the program's")
    timing = timing or TimingModel()

    state = None
    snapshot = None
    events: list[SaturationEvent] = []
    controls: list[bool] = []
    for k, ins in enumerate(program.instructions):
        if ins.opcode is Opcode.SET_NQ:
            state = FxStateVector.zero_state(ins.imm, fmt)
        elif ins.opcode is Opcode.READ_STATE:
            snapshot = state.copy()
        else:
            n = apply_gate(state, ins, tu, table)
            controls.append(ins.controlled)
            if n:
                log.warning("instruction %d (%s): %d saturated words", k, ins, n)
                events.append(SaturationEvent(k, ins, n))

    cycles, seconds = cycle_count(program.qubit_count, controls, timing)
    return EmulationReport(snapshot, cycles, seconds, events,
                           gate_count=len(controls), controlled_count=sum(controls))


def read_state(report: EmulationReport | FxStateVector) -> list[tuple[int, int, int]]:
    state = report.state if isinstance(report, EmulationReport) else report
    return [(k, int(r), int(m)) for k, (r, m) in enumerate(zip(state.re, state.im))]


def state_csv(state: FxStateVector) -> str:
    lsb = state.fmt.lsb
    rows = ["index,re_raw,im_raw,re_real,im_real"]
    for k, re, im in read_state(state):
        rows.append(f"{k},{re},{im},{re * lsb!r},{im * lsb!r}")
    return "\n".join(rows) + "\n"


def state_json(state: FxStateVector) -> str:
    lsb = state.fmt.lsb
    return json.dumps({
        "nq": state.nq,
        "format": str(state.fmt),
        "amplitudes": [{"index": k, "re_raw": re, "im_raw": im,
                        "re_real": re * lsb, "im_real": im * lsb}
                       for k, re, im in read_state(state)],
    }, indent=1)
