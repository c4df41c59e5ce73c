"""Verification of the fixed-point emulator against the double-precision oracle.

``endtoend`` mode compares the emulator with a textbook simulation of the
source circuit, so angle quantization, lowering and datapath rounding all
count. ``datapath`` mode feeds the oracle the same quantized program and
measures datapath rounding alone.
"""
from __future__ import annotations

import logging
import math
import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Mapping

from .compiler import lower
from .emulator import run
from .gates import GATE_TABLE, GateTableEntry
from .gcd import DEFAULT_THRESHOLD, GcdReport, gcd_distance
from .isa import DEFAULT_CONFIG, IsaConfig, Opcode
from .oracle import simulate_ast, simulate_program
from .qasm import parse_qasm
from .timing import TimingModel
from .trig import TrigConfig, trig_unit

log = logging.getLogger(__name__)

MODES = ("endtoend", "datapath")


def verify(source: str, cfg: IsaConfig = DEFAULT_CONFIG, *, mode: str = "endtoend",
           threshold: float = DEFAULT_THRESHOLD, circuit_id: str = "",
           table: Mapping[Opcode, GateTableEntry] = GATE_TABLE,
           timing: TimingModel | None = None) -> GcdReport:
    """Compile, emulate, simulate the reference and compare."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ast = parse_qasm(source, max_qubits=cfg.max_qubits)
        program = lower(ast, cfg)
    tu = trig_unit(TrigConfig(frac_bits=cfg.frac_bits))
    emu = run(program, tu, timing, table)
    if mode == "endtoend":
        ref = simulate_ast(ast)
    else:
        ref = simulate_program(program)
    report = gcd_distance(ref, emu.state, threshold, circuit_id)
    report.mode = mode
    report.gate_count = emu.gate_count
    report.cycles = emu.cycles
    report.seconds = emu.seconds
    report.saturation_events = len(emu.saturation_events)
    report.notes = [str(w.message) for w in caught]
    return report


def _verify_file(args) -> GcdReport:
    path, cfg, mode, threshold = args
    return verify(Path(path).read_text(), cfg, mode=mode, threshold=threshold,
                  circuit_id=Path(path).stem)


def qasm_files(target: str | Path) -> list[Path]:
    target = Path(target)
    if target.is_dir():
        return sorted(target.glob("*.qasm"))
    return [target]


def verify_paths(target: str | Path, cfg: IsaConfig = DEFAULT_CONFIG, *,
                 mode: str = "endtoend", threshold: float = DEFAULT_THRESHOLD,
                 jobs: int = 1) -> list[GcdReport]:
    """Verify one file or every ``*.qasm`` in a directory; results sorted by id."""
    work = [(str(p), cfg, mode, threshold) for p in qasm_files(target)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_verify_file, work))
    else:
        reports = [_verify_file(w) for w in work]
    return sorted(reports, key=lambda r: r.circuit_id)


# --- corpus -------------------------------------------------------------------------

_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def _angle(rng: random.Random) -> str:
    return repr(round(rng.uniform(-2 * math.pi, 2 * math.pi), 12))


def ghz(n: int, measure: bool = True) -> str:
    lines = [_HEADER + f"qreg q[{n}];"]
    if measure:
        lines.append(f"creg c[{n}];")
    lines.append("h q[0];")
    lines += [f"cx q[{k}],q[{k + 1}];" for k in range(n - 1)]
    if measure:
        lines.append("measure q -> c;")
    return "\n".join(lines) + "\n"


def qft(n: int, rng: random.Random) -> str:
    """QFT applied to a random basis state (so the output has non-trivial phases)."""
    lines = [_HEADER + f"qreg q[{n}];"]
    lines += [f"x q[{k}];" for k in range(n) if rng.random() < 0.5]
    for j in reversed(range(n)):
        lines.append(f"h q[{j}];")
        for k in reversed(range(j)):
            lines.append(f"cp(pi/{2 ** (j - k)}) q[{k}],q[{j}];")
    lines += [f"swap q[{k}],q[{n - 1 - k}];" for k in range(n // 2)]
    return "\n".join(lines) + "\n"


def w_state(n: int) -> str:
    lines = [_HEADER + f"qreg q[{n}];", "x q[0];"]
    for k in range(n - 1):
        theta = 2 * math.acos(math.sqrt(1 / (n - k)))
        lines.append(f"cry({theta!r}) q[{k}],q[{k + 1}];")
        lines.append(f"cx q[{k + 1}],q[{k}];")
    return "\n".join(lines) + "\n"


_CLIFFORD_T_1Q = ("h", "s", "sdg", "t", "tdg", "x", "y", "z")
_CLIFFORD_T_2Q = ("cx", "cz")


def random_clifford_t(n: int, gates: int, rng: random.Random) -> str:
    lines = [_HEADER + f"qreg q[{n}];"]
    for _ in range(gates):
        if n > 1 and rng.random() < 0.3:
            a, b = rng.sample(range(n), 2)
            lines.append(f"{rng.choice(_CLIFFORD_T_2Q)} q[{a}],q[{b}];")
        else:
            lines.append(f"{rng.choice(_CLIFFORD_T_1Q)} q[{rng.randrange(n)}];")
    return "\n".join(lines) + "\n"


_ROT_1Q = {"rx": 1, "ry": 1, "rz": 1, "p": 1, "u1": 1, "u2": 2, "u3": 3, "h": 0, "sx": 0}
_ROT_2Q = {"cx": 0, "crz": 1, "cry": 1, "crx": 1, "cp": 1, "rzz": 1, "cu3": 3}


def random_rotations(n: int, gates: int, rng: random.Random) -> str:
    lines = [_HEADER + f"qreg q[{n}];"]
    for _ in range(gates):
        if n > 1 and rng.random() < 0.35:
            name = rng.choice(sorted(_ROT_2Q))
            a, b = rng.sample(range(n), 2)
            qubits = f"q[{a}],q[{b}]"
            arity = _ROT_2Q[name]
        else:
            name = rng.choice(sorted(_ROT_1Q))
            qubits = f"q[{rng.randrange(n)}]"
            arity = _ROT_1Q[name]
        params = f"({','.join(_angle(rng) for _ in range(arity))})" if arity else ""
        lines.append(f"{name}{params} {qubits};")
    return "\n".join(lines) + "\n"


def corpus_generate(seed: int = 0) -> dict[str, str]:
    """Deterministic circuit corpus keyed by file stem."""
    rng = random.Random(seed)
    corpus: dict[str, str] = {}
    for n in range(1, 17):
        corpus[f"ghz_{n:02d}"] = ghz(n)
    for n in (2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16):
        corpus[f"qft_{n:02d}"] = qft(n, rng)
    for n in (2, 3, 4, 5, 8, 11, 16):
        corpus[f"wstate_{n:02d}"] = w_state(n)
    for k, n in enumerate((2, 3, 4, 4, 6, 8, 10, 12, 14, 16)):
        corpus[f"clifft_{k:02d}_{n:02d}q"] = random_clifford_t(n, 12 * n, rng)
    for k, n in enumerate((1, 2, 3, 4, 4, 5, 7, 9, 13, 16)):
        corpus[f"rot_{k:02d}_{n:02d}q"] = random_rotations(n, min(10 * n, 120), rng)
    corpus["mixed_16q_200g"] = random_rotations(16, 200, rng)
    return corpus


def write_corpus(out_dir: str | Path, seed: int = 0) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in corpus_generate(seed).items():
        path = out / f"{name}.qasm"
        path.write_text(text)
        paths.append(path)
    return paths
