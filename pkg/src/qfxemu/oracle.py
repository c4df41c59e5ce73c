"""Double-precision reference simulation.

Three independent routes live here:

* :func:`ref_apply` walks the same butterfly pairs and operand table as the
  fixed-point emulator, but with real ``sin``/``cos`` and complex128
  arithmetic. It isolates datapath rounding from everything else.
* :func:`kron_operator` / :func:`simulate_kron` build each instruction's
  full ``2**n x 2**n`` matrix from Kronecker products of textbook 2x2
  matrices, sharing nothing with the gate table.
* :func:`simulate_ast` applies textbook matrices of the source-level gates
  directly to the parsed circuit, with unquantized angles, bypassing the
  compiler altogether.

Qubit ``k`` is bit ``k`` of a basis-state index. A gate matrix acting on
arguments ``(q0, q1, ...)`` uses the same convention: argument ``k`` is bit
``k`` of the matrix row/column index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Mapping

import numpy as np

from .compiler import LoweredGate
from .gates import GATE_TABLE, GateTableEntry
from .isa import DEFAULT_CONFIG, Instruction, IsaConfig, Opcode, Program
from .qasm import Barrier, CircuitAst, GateCall, Measure


class OracleError(RuntimeError):
    pass


# --- textbook matrices ---------------------------------------------------------

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
SX2 = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2


def phase(lam: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * lam)]], dtype=complex)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -np.exp(1j * lam) * s],
                     [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def controlled(u: np.ndarray, n_controls: int = 1) -> np.ndarray:
    """Controls on the low arguments, the target block on the high ones."""
    m = u.shape[0]
    dim = m << n_controls
    out = np.eye(dim, dtype=complex)
    ones = (1 << n_controls) - 1
    idx = [ones + (k << n_controls) for k in range(m)]
    out[np.ix_(idx, idx)] = u
    return out


def _swap() -> np.ndarray:
    m = np.eye(4, dtype=complex)
    return m[[0, 2, 1, 3]]


def _pauli_rotation(p: np.ndarray, theta: float) -> np.ndarray:
    pp = np.kron(p, p)
    return math.cos(theta / 2) * np.eye(4) - 1j * math.sin(theta / 2) * pp


def _cswap() -> np.ndarray:
    # control = argument 0, swap arguments 1 and 2
    m = np.eye(8, dtype=complex)
    perm = list(range(8))
    perm[3], perm[5] = 5, 3
    return m[perm]


def _rccx() -> np.ndarray:
    m = np.zeros((8, 8), dtype=complex)
    for k in (0, 1, 2, 4, 6):
        m[k, k] = 1
    m[5, 5] = -1
    m[3, 7] = -1j
    m[7, 3] = 1j
    return m


TEXTBOOK: dict[str, Callable[..., np.ndarray]] = {
    "U": u3, "u3": u3, "u": u3,
    "u2": lambda phi, lam: u3(math.pi / 2, phi, lam),
    "u1": phase, "p": phase,
    "id": lambda: I2, "u0": lambda gamma: I2,
    "x": lambda: X2, "y": lambda: Y2, "z": lambda: Z2, "h": lambda: H2,
    "s": lambda: phase(math.pi / 2), "sdg": lambda: phase(-math.pi / 2),
    "t": lambda: phase(math.pi / 4), "tdg": lambda: phase(-math.pi / 4),
    "sx": lambda: SX2, "sxdg": lambda: SX2.conj().T,
    "rx": rx, "ry": ry, "rz": rz,
    "CX": lambda: controlled(X2), "cx": lambda: controlled(X2),
    "cy": lambda: controlled(Y2), "cz": lambda: controlled(Z2),
    "ch": lambda: controlled(H2),
    "crx": lambda t: controlled(rx(t)), "cry": lambda t: controlled(ry(t)),
    "crz": lambda t: controlled(rz(t)),
    "cu1": lambda lam: controlled(phase(lam)), "cp": lambda lam: controlled(phase(lam)),
    "cu3": lambda t, p, l: controlled(u3(t, p, l)),
    "cu": lambda t, p, l, g: controlled(np.exp(1j * g) * u3(t, p, l)),
    "csx": lambda: controlled(SX2),
    "swap": _swap,
    "rxx": lambda t: _pauli_rotation(X2, t),
    "rzz": lambda t: _pauli_rotation(Z2, t),
    "ccx": lambda: controlled(X2, 2),
    "cswap": _cswap,
    "rccx": _rccx,
    "c3x": lambda: controlled(X2, 3),
    "c3sqrtx": lambda: controlled(SX2, 3),
}


def textbook_matrix(name: str, params: Iterable[float] = ()) -> np.ndarray:
    try:
        fn = TEXTBOOK[name]
    except KeyError:
        raise OracleError(f"no textbook matrix for '{name}'") from None
    return fn(*params)


def isa_matrix(opcode: Opcode, angle: float) -> np.ndarray:
    """Textbook 2x2 matrix an opcode stands for, given its immediate in units of pi."""
    opcode = Opcode(opcode)
    if opcode is Opcode.X:
        return X2
    if opcode is Opcode.Y:
        return Y2
    if opcode is Opcode.Z:
        return Z2
    if opcode is Opcode.H:
        return H2
    if opcode in (Opcode.S, Opcode.SDG, Opcode.T, Opcode.TDG, Opcode.P):
        return phase(math.pi * angle)
    if opcode is Opcode.RX:
        return rx(2 * math.pi * angle)
    if opcode is Opcode.RY:
        return ry(2 * math.pi * angle)
    if opcode is Opcode.RZ:
        return rz(2 * math.pi * angle)
    raise OracleError(f"{opcode.name} is not a gate")


# --- state vectors --------------------------------------------------------------

@dataclass
class RefStateVector:
    nq: int
    amps: np.ndarray

    @classmethod
    def zero_state(cls, nq: int) -> RefStateVector:
        amps = np.zeros(1 << nq, dtype=complex)
        amps[0] = 1.0
        return cls(nq, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> RefStateVector:
        return RefStateVector(self.nq, self.amps.copy())


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, qubits: list[int]) -> np.ndarray:
    """Apply an ``m``-qubit matrix to the given qubits of an ``n``-qubit vector."""
    n = amps.size.bit_length() - 1
    m = len(qubits)
    if matrix.shape != (1 << m, 1 << m):
        raise OracleError(f"matrix shape {matrix.shape} does not act on {m} qubit(s)")
    psi = amps.reshape([2] * n)
    mt = matrix.reshape([2] * (2 * m))
    # axis for qubit q in psi is n-1-q; matrix axis r (and m+r) is argument m-1-r
    col_axes = [m + r for r in range(m)]
    state_axes = [n - 1 - qubits[m - 1 - r] for r in range(m)]
    out = np.tensordot(mt, psi, axes=(col_axes, state_axes))
    out = np.moveaxis(out, list(range(m)), state_axes)
    return out.reshape(-1)


def pairs(nq: int, target: int, control: int | None):
    """Butterfly pairs by masking every index (not the emulator's bit insertion)."""
    idx = np.arange(1 << nq)
    keep = (idx >> target) & 1 == 0
    if control is not None:
        keep &= (idx >> control) & 1 == 1
    i = idx[keep]
    return i, i + (1 << target)


def ref_apply_angle(state: RefStateVector, opcode: Opcode, target: int,
                    control: int | None, angle: float,
                    table: Mapping[Opcode, GateTableEntry] = GATE_TABLE) -> RefStateVector:
    """Exact-arithmetic twin of the emulator datapath for one gate, in place."""
    if not 0 <= target < state.nq or (control is not None and
                                       (not 0 <= control < state.nq or control == target)):
        raise OracleError(f"bad qubit operands t={target} c={control} for nq={state.nq}")
    entry = table[Opcode(opcode)]
    s, c = math.sin(math.pi * angle), math.cos(math.pi * angle)
    i, j = pairs(state.nq, target, control)
    a = state.amps
    words = (a[i].real, a[i].imag, a[j].real, a[j].imag)
    out = []
    for k in range(4):
        v = np.zeros(i.size)
        for code, trig in ((entry.sin_src[k], s), (entry.cos_src[k], c)):
            if code:
                w = words[abs(code) - 1]
                v = v + (-w if code < 0 else w) * trig
        out.append(v)
    if not entry.hold_i:
        a[i] = out[0] + 1j * out[1]
    if not entry.hold_j:
        a[j] = out[2] + 1j * out[3]
    return state


def ref_apply(state: RefStateVector, ins: Instruction | LoweredGate,
              cfg: IsaConfig = DEFAULT_CONFIG,
              table: Mapping[Opcode, GateTableEntry] = GATE_TABLE) -> RefStateVector:
    """Apply an instruction (quantized immediate) or a lowered gate (exact angle)."""
    if isinstance(ins, LoweredGate):
        return ref_apply_angle(state, ins.opcode, ins.target, ins.control, ins.angle, table)
    if not ins.opcode.is_gate:
        raise OracleError(f"{ins.opcode.name} is not a g-type instruction")
    control = ins.control if ins.controlled else None
    return ref_apply_angle(state, ins.opcode, ins.target, control, ins.angle(cfg), table)


def simulate_program(program: Program,
                     table: Mapping[Opcode, GateTableEntry] = GATE_TABLE) -> RefStateVector:
    program.validate()
    state = RefStateVector.zero_state(program.qubit_count)
    for ins in program.gates:
        ref_apply(state, ins, program.config, table)
    return state


def simulate_lowered(nq: int, gates: Iterable[LoweredGate]) -> RefStateVector:
    state = RefStateVector.zero_state(nq)
    for g in gates:
        ref_apply(state, g)
    return state


def lowered_unitary(nq: int, gates: list[LoweredGate]) -> np.ndarray:
    """Columns are the images of each basis state under ``ref_apply``."""
    cols = []
    for k in range(1 << nq):
        st = RefStateVector(nq, np.zeros(1 << nq, dtype=complex))
        st.amps[k] = 1.0
        for g in gates:
            ref_apply(st, g)
        cols.append(st.amps)
    return np.stack(cols, axis=1)


# --- brute-force Kronecker construction -----------------------------------------

_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)


def kron_operator(nq: int, u: np.ndarray, target: int, control: int | None = None) -> np.ndarray:
    """Full layer matrix: identity on idle qubits, highest qubit leftmost."""
    def chain(factors: dict[int, np.ndarray]) -> np.ndarray:
        return reduce(np.kron, [factors.get(q, I2) for q in reversed(range(nq))])
    if control is None:
        return chain({target: u})
    return chain({control: _P0}) + chain({control: _P1, target: u})


def simulate_kron(program: Program) -> np.ndarray:
    program.validate()
    nq = program.qubit_count
    psi = np.zeros(1 << nq, dtype=complex)
    psi[0] = 1.0
    for ins in program.gates:
        control = ins.control if ins.controlled else None
        psi = kron_operator(nq, isa_matrix(ins.opcode, ins.angle(program.config)),
                            ins.target, control) @ psi
    return psi


# --- source-level reference ----------------------------------------------------

def simulate_ast(ast: CircuitAst) -> RefStateVector:
    """Textbook simulation of a parsed circuit at source-level angles.

    Gates with a known matrix are applied directly; others (user macros and
    the few library gates without one) are expanded through their bodies.
    Barriers and terminal measurements are ignored.
    """
    nq = ast.num_qubits
    offsets = ast.qubit_offsets()
    state = RefStateVector.zero_state(nq)

    def apply(name: str, params: list[float], qubits: list[int]) -> None:
        gdef = ast.gates.get(name)
        if name in TEXTBOOK and (gdef is None or gdef.builtin):
            state.amps = apply_matrix(state.amps, textbook_matrix(name, params), qubits)
            return
        if gdef is None or gdef.opaque:
            raise OracleError(f"cannot simulate gate '{name}'")
        env = dict(zip(gdef.params, params))
        bind = dict(zip(gdef.qargs, qubits))
        for stmt in gdef.body:
            if isinstance(stmt, GateCall):
                apply(stmt.name, [e.evaluate(env) for e in stmt.params],
                      [bind[a.reg] for a in stmt.args])

    for stmt in ast.statements:
        if isinstance(stmt, (Barrier, Measure)):
            continue
        if not isinstance(stmt, GateCall):
            raise OracleError(f"unsupported statement at line {stmt.line}")
        width = max((ast.qregs[a.reg] for a in stmt.args if a.index is None), default=1)
        params = [e.evaluate() for e in stmt.params]
        for k in range(width):
            qubits = [offsets[a.reg] + (k if a.index is None else a.index) for a in stmt.args]
            apply(stmt.name, params, qubits)
    return state


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise deviation after removing the best global phase between ``a`` and ``b``."""
    inner = np.vdot(b.reshape(-1), a.reshape(-1))
    ph = inner / abs(inner) if abs(inner) > 0 else 1.0
    return float(np.max(np.abs(a - ph * b)))

