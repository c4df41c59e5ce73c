"""Command-line entry point: ``qfxemu <command> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .compiler import compile_qasm
from .emulator import run, state_csv, state_json
from .gcd import DEFAULT_THRESHOLD
from .harness import MODES, verify_paths, write_corpus
from .isa import IsaConfig, IsaError, format_listing, load_ambin, save_ambin
from .qasm import QasmError
from .timing import TimingModel
from .trig import TrigConfig, TrigUnit


def _isa_config(args) -> IsaConfig:
    return IsaConfig.for_max_qubits(args.max_qubits, frac_bits=args.frac_bits)


def _load_program(path: Path, args):
    if path.suffix == ".ambin":
        return load_ambin(path), None
    text = path.read_text()
    return compile_qasm(text, _isa_config(args)), text


def cmd_compile(args) -> int:
    src = Path(args.input)
    text = src.read_text()
    prog = compile_qasm(text, _isa_config(args))
    out = Path(args.output) if args.output else src.with_suffix(".ambin")
    save_ambin(prog, out)
    if args.listing:
        Path(args.listing).write_text(format_listing(prog, text.splitlines()))
    print(f"{src} -> {out}: {len(prog.instructions)} instructions, "
          f"{prog.qubit_count} qubits, {prog.config.width}-bit words")
    return 0


def cmd_run(args) -> int:
    prog, _ = _load_program(Path(args.input), args)
    report = run(prog, timing=TimingModel.from_clock_mhz(args.clock_mhz))
    if args.dump:
        dump = Path(args.dump)
        text = state_json(report.state) if dump.suffix == ".json" else state_csv(report.state)
        dump.write_text(text)
    else:
        sys.stdout.write(state_csv(report.state))
    if args.timing:
        print(f"cycles={report.cycles} time={report.seconds:.6e} s "
              f"gates={report.gate_count} controlled={report.controlled_count}")
    for ev in report.saturation_events:
        print(f"saturation: instruction {ev.instruction_index} ({ev.instruction}): "
              f"{ev.count} words", file=sys.stderr)
    return 0


def cmd_trig_check(args) -> int:
    unit = TrigUnit(TrigConfig(frac_bits=args.frac_bits, lut_addr_bits=args.lut_bits,
                               taylor_order=args.order))
    stats = unit.sweep_errors()
    # four LSBs: 2**-16 at the default 18 fractional bits
    bound = 2.0 ** -(args.frac_bits - 2)
    stats.update(lut_bits=args.lut_bits, order=args.order, frac_bits=args.frac_bits,
                 bound=bound)
    if args.csv:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(stats))
        writer.writeheader()
        writer.writerow(stats)
        sys.stdout.write(buf.getvalue())
    else:
        for key, value in stats.items():
            print(f"{key}: {value}")
    worst = max(stats["max_sin_error"], stats["max_cos_error"])
    return 0 if worst <= bound else 1


def cmd_verify(args) -> int:
    cfg = _isa_config(args)
    reports = verify_paths(args.target, cfg, mode=args.mode, threshold=args.threshold,
                           jobs=args.jobs)
    if not reports:
        print(f"no .qasm files under {args.target}", file=sys.stderr)
        return 2
    for r in reports:
        print(r.summary())
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} circuits passed ({args.mode} mode)")
    if args.json:
        Path(args.json).write_text(json.dumps(
            [r.to_dict(args.distances) for r in reports], indent=2))
    return 1 if failed else 0


def cmd_corpus(args) -> int:
    paths = write_corpus(args.out, args.seed)
    print(f"wrote {len(paths)} circuits to {args.out}")
    return 0


def cmd_bench(args) -> int:
    model = TimingModel.from_clock_mhz(args.clock_mhz, n_pipe=args.n_pipe)
    prog, _ = _load_program(Path(args.input), args)
    report = run(prog, timing=model)
    ng = report.gate_count
    alpha = report.controlled_count / ng if ng else 0.0
    print(f"qubits={prog.qubit_count} gates={ng} controlled_fraction={alpha:.4f} "
          f"nq_min={model.nq_min}")
    print(f"cycles={report.cycles} time={report.seconds * 1e3:.6f} ms "
          f"@ {args.clock_mhz} MHz")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfxemu",
                                     description="Fixed-point quantum circuit emulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def isa_options(p):
        p.add_argument("--frac-bits", type=int, default=18)
        p.add_argument("--max-qubits", type=int, default=16)

    p = sub.add_parser("compile", help="compile OpenQASM 2.0 to a program binary")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--listing")
    isa_options(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="emulate a program (.ambin or .qasm)")
    p.add_argument("input")
    p.add_argument("--dump", help="write the final state to a .csv or .json file")
    p.add_argument("--timing", action="store_true")
    p.add_argument("--clock-mhz", type=float, default=100.0)
    isa_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trig-check", help="exhaustive trig-unit error sweep")
    p.add_argument("--lut-bits", type=int, default=8)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--frac-bits", type=int, default=18)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_trig_check)

    p = sub.add_parser("verify", help="compare emulator and reference simulation")
    p.add_argument("target", help="a .qasm file or a directory of them")
    p.add_argument("--json")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--mode", choices=MODES, default="endtoend")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--distances", action="store_true",
                   help="include per-amplitude distances in the JSON report")
    isa_options(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="circuit corpus management")
    corpus_sub = p.add_subparsers(dest="corpus_command", required=True)
    g = corpus_sub.add_parser("gen", help="generate the verification corpus")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_corpus)

    p = sub.add_parser("bench", help="closed-form cycle and time estimate")
    p.add_argument("input")
    p.add_argument("--clock-mhz", type=float, default=100.0)
    p.add_argument("--n-pipe", type=int, default=5)
    isa_options(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (QasmError, IsaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
