"""OpenQASM 2.0 lexer, parser and AST.

``qelib1.inc`` is built in: its gates are always defined, and an explicit
``include "qelib1.inc";`` is accepted (and recorded) but never read from
disk. Qubits of all ``qreg`` declarations are numbered globally in
declaration order, register by register.
"""
from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass, field
from typing import Union

from .qelib1 import QELIB1


class QasmError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f"line {line}:{col}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.col = col


class QasmSyntaxError(QasmError):
    pass


class QasmSemanticError(QasmError):
    pass


# --- expressions --------------------------------------------------------------

_BINOPS = {"+": operator.add, "-": operator.sub, "*": operator.mul,
           "/": operator.truediv, "^": operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan,
          "exp": math.exp, "ln": math.log, "sqrt": math.sqrt}


@dataclass(frozen=True)
class Num:
    value: float

    def evaluate(self, env=None) -> float:
        return self.value


@dataclass(frozen=True)
class Pi:
    def evaluate(self, env=None) -> float:
        return math.pi


@dataclass(frozen=True)
class Ident:
    name: str

    def evaluate(self, env=None) -> float:
        if env is None or self.name not in env:
            raise QasmSemanticError(f"unbound parameter '{self.name}'")
        return env[self.name]


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def evaluate(self, env=None) -> float:
        a, b = self.left.evaluate(env), self.right.evaluate(env)
        try:
            return float(_BINOPS[self.op](a, b))
        except (ZeroDivisionError, OverflowError) as exc:
            raise QasmSemanticError(f"cannot evaluate {a} {self.op} {b}: {exc}") from None


@dataclass(frozen=True)
class Neg:
    operand: "Expr"

    def evaluate(self, env=None) -> float:
        return -self.operand.evaluate(env)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def evaluate(self, env=None) -> float:
        x = self.arg.evaluate(env)
        try:
            return _FUNCS[self.func](x)
        except (ValueError, OverflowError) as exc:
            raise QasmSemanticError(f"cannot evaluate {self.func}({x}): {exc}") from None


Expr = Union[Num, Pi, Ident, BinOp, Neg, Call]


# --- statements ------------------------------------------------------------------

@dataclass(frozen=True)
class Arg:
    """A qubit or bit operand: ``reg[index]`` or the whole register ``reg``."""

    reg: str
    index: int | None = None
    line: int = 0
    col: int = 0

    def __str__(self):
        return self.reg if self.index is None else f"{self.reg}[{self.index}]"


@dataclass(frozen=True)
class GateCall:
    name: str
    params: tuple[Expr, ...]
    args: tuple[Arg, ...]
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Barrier:
    args: tuple[Arg, ...]
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Measure:
    qubit: Arg
    bit: Arg
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Reset:
    qubit: Arg
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class If:
    creg: str
    value: int
    body: Union[GateCall, Measure, Reset]
    line: int = 0
    col: int = 0


Statement = Union[GateCall, Barrier, Measure, Reset, If]


@dataclass
class GateDef:
    name: str
    params: list[str]
    qargs: list[str]
    body: list[Union[GateCall, Barrier]]
    opaque: bool = False
    builtin: bool = False
    line: int = 0


@dataclass
class CircuitAst:
    version: str | None = None
    includes: list[str] = field(default_factory=list)
    qregs: dict[str, int] = field(default_factory=dict)
    cregs: dict[str, int] = field(default_factory=dict)
    gates: dict[str, GateDef] = field(default_factory=dict)
    statements: list[Statement] = field(default_factory=list)

    @property
    def num_qubits(self) -> int:
        return sum(self.qregs.values())

    def qubit_offsets(self) -> dict[str, int]:
        out, base = {}, 0
        for name, size in self.qregs.items():
            out[name] = base
            base += size
        return out


# --- lexer -------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<eq>==)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[;,()\[\]{}+\-*/^])
""", re.VERBOSE | re.DOTALL)

_KEYWORDS = {"OPENQASM", "include", "qreg", "creg", "gate", "opaque", "barrier",
             "measure", "reset", "if", "pi", "U", "CX"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise QasmSyntaxError(f"unexpected character {source[pos]!r}",
                                  line, pos - line_start + 1)
        kind, text = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "newline":
            line, line_start = line + 1, m.end()
        elif kind == "block":
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rfind("\n") + 1
        elif kind not in ("ws", "comment"):
            if kind == "id" and text in _KEYWORDS:
                kind = text
            elif kind in ("sym", "arrow", "eq"):
                kind = text
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- parser ------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, ast: CircuitAst, builtin: bool = False):
        self.toks = tokenize(source)
        self.pos = 0
        self.ast = ast
        self.builtin = builtin

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            return self.next()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise QasmSyntaxError(f"expected {what or repr(kind)}, found {found!r}",
                                  self.tok.line, self.tok.col)
        return self.next()

    def error(self, msg: str, tok: Token | None = None, cls=QasmSemanticError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    # program structure

    def parse_program(self) -> None:
        if self.tok.kind == "OPENQASM":
            self.next()
            t = self.tok
            if t.kind not in ("real", "int"):
                raise self.error("expected version number", t, QasmSyntaxError)
            self.next()
            if t.text not in ("2.0", "2"):
                raise self.error(f"unsupported OpenQASM version {t.text}", t)
            self.ast.version = "2.0"
            self.expect(";")
        while self.tok.kind != "eof":
            self.parse_statement()

    def parse_statement(self) -> None:
        t = self.tok
        kind = t.kind
        if kind == "include":
            self.next()
            name = self.expect("string", "file name").text[1:-1]
            self.expect(";")
            if name != "qelib1.inc":
                raise self.error(f"cannot include '{name}': only qelib1.inc is available", t)
            self.ast.includes.append(name)
        elif kind in ("qreg", "creg"):
            self.parse_register()
        elif kind in ("gate", "opaque"):
            self.parse_gate_def()
        elif kind == "if":
            self.ast.statements.append(self.parse_if())
        else:
            self.ast.statements.append(self.parse_qop())

    def parse_register(self) -> None:
        kw = self.next()
        name_tok = self.expect("id", "register name")
        self.expect("[")
        size_tok = self.expect("int", "register size")
        self.expect("]")
        self.expect(";")
        name, size = name_tok.text, int(size_tok.text)
        if size < 1:
            raise self.error("register size must be positive", size_tok)
        if name in self.ast.qregs or name in self.ast.cregs:
            raise self.error(f"register '{name}' already declared", name_tok)
        (self.ast.qregs if kw.kind == "qreg" else self.ast.cregs)[name] = size

    def parse_id_list(self) -> list[str]:
        names = [self.expect("id", "identifier").text]
        while self.accept(","):
            names.append(self.expect("id", "identifier").text)
        return names

    def parse_gate_def(self) -> None:
        kw = self.next()
        name_tok = self.tok
        if name_tok.kind not in ("id",):
            raise self.error("expected gate name", name_tok, QasmSyntaxError)
        self.next()
        name = name_tok.text
        prior = self.ast.gates.get(name)
        # without an explicit include, builtin definitions may be shadowed
        if prior is not None and not (prior.builtin and "qelib1.inc" not in self.ast.includes):
            raise self.error(f"gate '{name}' already defined", name_tok)
        params: list[str] = []
        if self.accept("("):
            if self.tok.kind != ")":
                params = self.parse_id_list()
            self.expect(")")
        qargs = self.parse_id_list()
        for group, what in ((params, "parameter"), (qargs, "qubit argument")):
            if len(set(group)) != len(group):
                raise self.error(f"duplicate {what} name in gate '{name}'", name_tok)
        gdef = GateDef(name, params, qargs, [], opaque=kw.kind == "opaque",
                       builtin=self.builtin, line=name_tok.line)
        if gdef.opaque:
            self.expect(";")
        else:
            self.expect("{")
            while not self.accept("}"):
                body_tok = self.tok
                if body_tok.kind == "barrier":
                    self.next()
                    args = tuple(Arg(n, None, body_tok.line, body_tok.col)
                                 for n in self.parse_id_list())
                    self.expect(";")
                    stmt = Barrier(args, body_tok.line, body_tok.col)
                else:
                    stmt = self.parse_gate_call(in_gate=True)
                for a in stmt.args:
                    if a.reg not in qargs:
                        raise self.error(f"'{a.reg}' is not an argument of gate '{name}'",
                                         body_tok)
                if isinstance(stmt, GateCall):
                    self.check_params(stmt.params, set(params), body_tok)
                gdef.body.append(stmt)
        self.ast.gates[name] = gdef

    def check_params(self, exprs, allowed: set[str], tok: Token) -> None:
        def walk(e):
            if isinstance(e, Ident):
                if e.name not in allowed:
                    raise self.error(f"unknown parameter '{e.name}'", tok)
            elif isinstance(e, BinOp):
                walk(e.left)
                walk(e.right)
            elif isinstance(e, (Neg,)):
                walk(e.operand)
            elif isinstance(e, Call):
                walk(e.arg)
        for e in exprs:
            walk(e)

    def parse_if(self) -> If:
        t = self.next()
        self.expect("(")
        creg = self.expect("id", "classical register").text
        self.expect("==")
        value = int(self.expect("int", "integer").text)
        self.expect(")")
        if creg not in self.ast.cregs:
            raise self.error(f"undeclared classical register '{creg}'", t)
        body = self.parse_qop()
        if isinstance(body, Barrier):
            raise self.error("barrier cannot be conditioned", t, QasmSyntaxError)
        return If(creg, value, body, t.line, t.col)

    def parse_qop(self) -> Statement:
        t = self.tok
        if t.kind == "measure":
            self.next()
            q = self.parse_arg("q")
            self.expect("->")
            c = self.parse_arg("c")
            self.expect(";")
            if self.size_of(q) != self.size_of(c):
                raise self.error("measure operands differ in size", t)
            return Measure(q, c, t.line, t.col)
        if t.kind == "reset":
            self.next()
            q = self.parse_arg("q")
            self.expect(";")
            return Reset(q, t.line, t.col)
        if t.kind == "barrier":
            self.next()
            args = [self.parse_arg("q")]
            while self.accept(","):
                args.append(self.parse_arg("q"))
            self.expect(";")
            return Barrier(tuple(args), t.line, t.col)
        call = self.parse_gate_call(in_gate=False)
        self.check_broadcast(call)
        return call

    def parse_gate_call(self, in_gate: bool) -> GateCall:
        t = self.tok
        if t.kind not in ("id", "U", "CX"):
            raise self.error(f"expected a statement, found {t.text or 'end of input'!r}",
                             t, QasmSyntaxError)
        self.next()
        params: list[Expr] = []
        if self.accept("("):
            if self.tok.kind != ")":
                params.append(self.parse_expr())
                while self.accept(","):
                    params.append(self.parse_expr())
            self.expect(")")
        if in_gate:
            args = [Arg(n, None, t.line, t.col) for n in self.parse_id_list()]
        else:
            args = [self.parse_arg("q")]
            while self.accept(","):
                args.append(self.parse_arg("q"))
        self.expect(";")
        call = GateCall(t.text, tuple(params), tuple(args), t.line, t.col)
        self.check_signature(call, t)
        return call

    def check_signature(self, call: GateCall, tok: Token) -> None:
        if call.name == "U":
            n_params, n_qubits = 3, 1
        elif call.name == "CX":
            n_params, n_qubits = 0, 2
        else:
            gdef = self.ast.gates.get(call.name)
            if gdef is None:
                raise self.error(f"undefined gate '{call.name}'", tok)
            n_params, n_qubits = len(gdef.params), len(gdef.qargs)
        if len(call.params) != n_params:
            raise self.error(f"gate '{call.name}' takes {n_params} parameter(s), "
                             f"got {len(call.params)}", tok)
        if len(call.args) != n_qubits:
            raise self.error(f"gate '{call.name}' acts on {n_qubits} qubit(s), "
                             f"got {len(call.args)}", tok)
        names = [str(a) for a in call.args]
        if len(set(names)) != len(names):
            raise self.error(f"repeated qubit argument in '{call.name}'", tok)

    def parse_arg(self, space: str) -> Arg:
        t = self.expect("id", "register")
        regs = self.ast.qregs if space == "q" else self.ast.cregs
        kind = "quantum" if space == "q" else "classical"
        if t.text not in regs:
            raise self.error(f"undeclared {kind} register '{t.text}'", t)
        index = None
        if self.accept("["):
            it = self.expect("int", "index")
            self.expect("]")
            index = int(it.text)
            if index >= regs[t.text]:
                raise self.error(f"index {index} out of range for register "
                                 f"'{t.text}' of size {regs[t.text]}", it)
        return Arg(t.text, index, t.line, t.col)

    def size_of(self, arg: Arg) -> int:
        if arg.index is not None:
            return 1
        return self.ast.qregs.get(arg.reg) or self.ast.cregs[arg.reg]

    def check_broadcast(self, call: GateCall) -> None:
        sizes = {self.size_of(a) for a in call.args if a.index is None}
        if len(sizes) > 1:
            raise QasmSemanticError(f"register size mismatch in '{call.name}'",
                                    call.line, call.col)
        # whole-register args overlapping a single qubit of the same register
        whole = {a.reg for a in call.args if a.index is None}
        if any(a.index is not None and a.reg in whole for a in call.args):
            raise QasmSemanticError(f"overlapping qubit arguments in '{call.name}'",
                                    call.line, call.col)

    # expressions: + - < * / < unary - < ^ (right assoc) < atoms

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.tok.kind in ("+", "-"):
            op = self.next().kind
            left = BinOp(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_unary()
        while self.tok.kind in ("*", "/"):
            op = self.next().kind
            left = BinOp(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.parse_unary())
        if self.accept("+"):
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.accept("^"):
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expr:
        t = self.tok
        if t.kind in ("real", "int"):
            self.next()
            return Num(float(t.text))
        if t.kind == "pi":
            self.next()
            return Pi()
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "id":
            self.next()
            if t.text in _FUNCS:
                self.expect("(")
                e = self.parse_expr()
                self.expect(")")
                return Call(t.text, e)
            return Ident(t.text)
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}",
                         t, QasmSyntaxError)


def _builtin_gates() -> dict[str, GateDef]:
    ast = CircuitAst()
    _Parser(QELIB1, ast, builtin=True).parse_program()
    return ast.gates


_QELIB1_GATES = _builtin_gates()


def parse_qasm(source: str, max_qubits: int | None = 16) -> CircuitAst:
    """Parse OpenQASM 2.0 source into a :class:`CircuitAst`.

    Raises :class:`QasmError` (with line/column) on lexical, syntactic or
    semantic problems.
    """
    ast = CircuitAst(gates=dict(_QELIB1_GATES))
    parser = _Parser(source, ast)
    parser.parse_program()
    if max_qubits is not None and ast.num_qubits > max_qubits:
        raise QasmSemanticError(f"circuit declares {ast.num_qubits} qubits, "
                                f"more than the {max_qubits} supported")
    return ast
