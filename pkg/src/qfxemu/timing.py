"""Closed-form pipeline timing.

The arithmetic unit retires one amplitude pair per clock. An uncontrolled
gate touches ``2**(n-1)`` pairs, a controlled one half of that. Circuits
narrower than ``nq_min`` qubits are padded up to it: the pipeline still
walks the couples of an ``nq_min``-qubit state, discarding the extra writes,
which is how data hazards between consecutive gates are avoided. The pipeline
fill is paid once per program.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class TimingModel:
    n_pipe: int = 5
    clock_period: float = 10e-9

    def __post_init__(self):
        if self.n_pipe < 1:
            raise ValueError("n_pipe must be >= 1")

    @property
    def nq_min(self) -> int:
        # ceil(log2(n_pipe)) + 2
        return (self.n_pipe - 1).bit_length() + 2

    @classmethod
    def from_clock_mhz(cls, mhz: float, n_pipe: int = 5) -> TimingModel:
        return cls(n_pipe=n_pipe, clock_period=1e-6 / mhz)


def gate_cycles(nq: int, controlled: bool, model: TimingModel) -> int:
    span = max(nq, model.nq_min)
    return 1 << (span - 2) if controlled else 1 << (span - 1)


def cycle_count(nq: int, controlled: Iterable[bool],
                model: TimingModel = TimingModel()) -> tuple[int, float]:
    """Total cycles and seconds for a gate sequence given as controlled flags."""
    if nq < 1:
        raise ValueError("nq must be >= 1")
    cycles = sum(gate_cycles(nq, c, model) for c in controlled) + model.n_pipe - 1
    return cycles, cycles * model.clock_period
