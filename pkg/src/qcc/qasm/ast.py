"""Abstract syntax tree for OpenQASM 2.0.

Source spans are carried for diagnostics but excluded from equality, so an
AST compares equal to the AST of its own pretty-printed text.  Parameter
expressions at the top level are already evaluated to floats; inside gate
bodies they stay symbolic trees because they may reference formal parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import QasmSemanticError, SourceSpan

_NO_SPAN = SourceSpan(0, 0)


def _span_field() -> SourceSpan:
    return field(default=_NO_SPAN, compare=False)  # type: ignore[return-value]


# --- parameter expressions ---------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    operand: "Expr"


Expr = Num | Pi | Param | Neg | BinOp | Call

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


def evaluate(expr: Expr, env: dict[str, float], span: SourceSpan | None = None) -> float:
    """Evaluate a parameter expression to a double.

    env maps formal parameter names to values; at the program top level it is
    empty and any identifier is an error.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Pi):
        return math.pi
    if isinstance(expr, Param):
        if expr.name not in env:
            raise QasmSemanticError(f"unknown parameter '{expr.name}'", span)
        return env[expr.name]
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env, span)
    if isinstance(expr, BinOp):
        lhs = evaluate(expr.lhs, env, span)
        rhs = evaluate(expr.rhs, env, span)
        try:
            if expr.op == "+":
                result = lhs + rhs
            elif expr.op == "-":
                result = lhs - rhs
            elif expr.op == "*":
                result = lhs * rhs
            elif expr.op == "/":
                result = lhs / rhs
            elif expr.op == "^":
                result = lhs**rhs
            else:
                raise QasmSemanticError(f"unknown operator '{expr.op}'", span)
        except ZeroDivisionError:
            raise QasmSemanticError("division by zero in parameter expression", span) from None
        except OverflowError:
            raise QasmSemanticError("parameter expression overflows", span) from None
        if not math.isfinite(result):
            raise QasmSemanticError("parameter expression is not finite", span)
        return result
    if isinstance(expr, Call):
        value = evaluate(expr.operand, env, span)
        try:
            result = _FUNCTIONS[expr.func](value)
        except ValueError:
            raise QasmSemanticError(f"domain error in {expr.func}()", span) from None
        if not math.isfinite(result):
            raise QasmSemanticError("parameter expression is not finite", span)
        return result
    raise TypeError(f"not an expression: {expr!r}")


def expr_to_qasm(expr: Expr | float) -> str:
    if isinstance(expr, float):
        return repr(expr)
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Pi):
        return "pi"
    if isinstance(expr, Param):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{expr_to_qasm(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({expr_to_qasm(expr.lhs)} {expr.op} {expr_to_qasm(expr.rhs)})"
    if isinstance(expr, Call):
        return f"{expr.func}({expr_to_qasm(expr.operand)})"
    raise TypeError(f"not an expression: {expr!r}")


# --- statements ---------------------------------------------------------------


@dataclass(frozen=True)
class Argument:
    """A register reference, optionally indexed.  index=None means the whole register."""

    reg: str
    index: int | None
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class RegDecl:
    kind: str  # "qreg" | "creg"
    name: str
    size: int
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class GateCall:
    """Top-level calls carry float params; calls in gate bodies carry Expr trees."""

    name: str
    params: tuple
    qargs: tuple[Argument, ...]
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Measure:
    qarg: Argument
    carg: Argument
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Reset:
    qarg: Argument
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class BarrierStmt:
    qargs: tuple[Argument, ...]
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class IfStatement:
    creg: str
    value: int
    body: "Statement"
    span: SourceSpan = _span_field()


Statement = GateCall | Measure | Reset | BarrierStmt | IfStatement


@dataclass(frozen=True)
class GateDef:
    name: str
    params: tuple[str, ...]
    qubits: tuple[str, ...]
    body: tuple[Statement, ...]
    span: SourceSpan = _span_field()


@dataclass
class QasmAst:
    version: str
    includes: list[str]
    declarations: list[RegDecl]
    gate_defs: list[GateDef]
    statements: list[Statement]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QasmAst):
            return NotImplemented
        return (
            self.version == other.version
            and self.includes == other.includes
            and self.declarations == other.declarations
            and self.gate_defs == other.gate_defs
            and self.statements == other.statements
        )


# --- pretty printer -----------------------------------------------------------


def _arg_to_qasm(arg: Argument) -> str:
    if arg.index is None:
        return arg.reg
    return f"{arg.reg}[{arg.index}]"


def _stmt_to_qasm(stmt: Statement) -> str:
    if isinstance(stmt, GateCall):
        params = ""
        if stmt.params:
            params = "(" + ", ".join(expr_to_qasm(p) for p in stmt.params) + ")"
        args = ", ".join(_arg_to_qasm(a) for a in stmt.qargs)
        return f"{stmt.name}{params} {args};"
    if isinstance(stmt, Measure):
        return f"measure {_arg_to_qasm(stmt.qarg)} -> {_arg_to_qasm(stmt.carg)};"
    if isinstance(stmt, Reset):
        return f"reset {_arg_to_qasm(stmt.qarg)};"
    if isinstance(stmt, BarrierStmt):
        return "barrier " + ", ".join(_arg_to_qasm(a) for a in stmt.qargs) + ";"
    if isinstance(stmt, IfStatement):
        return f"if ({stmt.creg} == {stmt.value}) " + _stmt_to_qasm(stmt.body)
    raise TypeError(f"not a statement: {stmt!r}")


def to_qasm(ast: QasmAst) -> str:
    """Render an AST back to source that parses to an equal AST."""
    lines = [f"OPENQASM {ast.version};"]
    for name in ast.includes:
        lines.append(f'include "{name}";')
    for decl in ast.declarations:
        lines.append(f"{decl.kind} {decl.name}[{decl.size}];")
    for gdef in ast.gate_defs:
        params = ""
        if gdef.params:
            params = "(" + ", ".join(gdef.params) + ")"
        header = f"gate {gdef.name}{params} " + ", ".join(gdef.qubits) + " {"
        lines.append(header)
        for stmt in gdef.body:
            lines.append("  " + _stmt_to_qasm(stmt))
        lines.append("}")
    for stmt in ast.statements:
        lines.append(_stmt_to_qasm(stmt))
    return "\n".join(lines) + "\n"
