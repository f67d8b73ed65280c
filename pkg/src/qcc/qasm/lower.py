"""Lowering from the QASM AST to the quantum IR.

Whole-register statements are expanded per index in ascending order, and
user-defined gate macros are inlined recursively down to the primitive
vocabulary: the standard-library gates, u3 (for the U builtin), cx (for CX),
measure, reset and barriers.  Standard-library gates are not inlined here;
turning them into a hardware-native set is the optimizer's job.

A conditioned statement lowers to one ConditionalRegion per expanded gate.
The comparison is against a classical register that no unitary body can
modify, so splitting a multi-gate expansion into individually conditioned
gates preserves the program's meaning.
"""

from __future__ import annotations

from ..errors import QasmSemanticError, SourceSpan
from ..ir import (
    Barrier,
    ConditionalRegion,
    CRegister,
    Dealloc,
    Inst,
    IrOp,
    Qalloc,
    QRegister,
    QuantumProgram,
    QubitRef,
    ResultRef,
)
from . import ast, qelib1


class _Lowering:
    def __init__(self, program_ast: ast.QasmAst):
        self.ast = program_ast
        self.qregs: dict[str, QRegister] = {}
        self.cregs: dict[str, CRegister] = {}
        base = 0
        self.bases: dict[str, int] = {}
        registers = []
        cregisters = []
        for decl in program_ast.declarations:
            if decl.kind == "qreg":
                reg = QRegister(len(registers), decl.size, decl.name)
                self.qregs[decl.name] = reg
                self.bases[decl.name] = base
                base += decl.size
                registers.append(reg)
            else:
                creg = CRegister(len(cregisters), decl.size, decl.name)
                self.cregs[decl.name] = creg
                cregisters.append(creg)
        self.registers = registers
        self.cregisters = cregisters

        self.use_qelib = "qelib1.inc" in program_ast.includes
        self.std_defs = qelib1.gate_defs() if self.use_qelib else {}
        self.user_defs = {g.name: g for g in program_ast.gate_defs}
        self.ops: list[IrOp] = []
        self.inline_stack: list[str] = []

    def qubit(self, reg: QRegister, index: int) -> QubitRef:
        return QubitRef(reg.register_id, index, self.bases[reg.name] + index)

    # --- statement expansion ---

    def broadcast(self, qargs: tuple[ast.Argument, ...], span: SourceSpan) -> list[tuple[QubitRef, ...]]:
        """Expand whole-register arguments index by index, ascending."""
        width = 1
        for arg in qargs:
            if arg.index is None:
                width = self.qregs[arg.reg].size
                break
        rows = []
        for i in range(width):
            row = []
            for arg in qargs:
                reg = self.qregs[arg.reg]
                row.append(self.qubit(reg, i if arg.index is None else arg.index))
            rows.append(tuple(row))
        return rows

    def lower_gate_call(self, call: ast.GateCall, sink: list[IrOp]) -> None:
        params = tuple(float(p) for p in call.params)
        for qubits in self.broadcast(call.qargs, call.span):
            self.apply_gate(call.name, params, qubits, call.span, sink)

    def apply_gate(
        self,
        name: str,
        params: tuple[float, ...],
        qubits: tuple[QubitRef, ...],
        span: SourceSpan,
        sink: list[IrOp],
    ) -> None:
        if name == "U":
            sink.append(Inst("u3", params, qubits))
            return
        if name == "CX":
            sink.append(Inst("cx", (), qubits))
            return
        if self.use_qelib and name in self.std_defs:
            sink.append(Inst(name, params, qubits))
            return
        gdef = self.user_defs.get(name)
        if gdef is None:
            raise QasmSemanticError(f"unknown gate '{name}'", span)
        if name in self.inline_stack:
            raise QasmSemanticError(f"recursive gate definition '{name}'", span)
        if len(params) != len(gdef.params) or len(qubits) != len(gdef.qubits):
            raise QasmSemanticError(f"wrong arity in call to gate '{name}'", span)

        env = dict(zip(gdef.params, params))
        qmap = dict(zip(gdef.qubits, qubits))
        self.inline_stack.append(name)
        try:
            for stmt in gdef.body:
                if isinstance(stmt, ast.BarrierStmt):
                    sink.append(Barrier(tuple(qmap[a.reg] for a in stmt.qargs)))
                    continue
                assert isinstance(stmt, ast.GateCall)
                values = tuple(ast.evaluate(p, env, stmt.span) for p in stmt.params)
                mapped = tuple(qmap[a.reg] for a in stmt.qargs)
                if len(set(mapped)) != len(mapped):
                    raise QasmSemanticError(
                        f"gate '{name}' applies '{stmt.name}' to a repeated qubit", stmt.span
                    )
                self.apply_gate(stmt.name, values, mapped, stmt.span, sink)
        finally:
            self.inline_stack.pop()

    def lower_statement(self, stmt: ast.Statement, sink: list[IrOp]) -> None:
        if isinstance(stmt, ast.GateCall):
            self.lower_gate_call(stmt, sink)
        elif isinstance(stmt, ast.Measure):
            qreg = self.qregs[stmt.qarg.reg]
            creg = self.cregs[stmt.carg.reg]
            if stmt.qarg.index is None:
                pairs = [(i, i) for i in range(qreg.size)]
            else:
                pairs = [(stmt.qarg.index, stmt.carg.index)]
            for qi, ci in pairs:
                sink.append(
                    Inst("measure", (), (self.qubit(qreg, qi),), ResultRef(creg.creg_id, ci))
                )
        elif isinstance(stmt, ast.Reset):
            qreg = self.qregs[stmt.qarg.reg]
            indices = range(qreg.size) if stmt.qarg.index is None else [stmt.qarg.index]
            for i in indices:
                sink.append(Inst("reset", (), (self.qubit(qreg, i),)))
        elif isinstance(stmt, ast.BarrierStmt):
            qubits: list[QubitRef] = []
            for arg in stmt.qargs:
                qreg = self.qregs[arg.reg]
                indices = range(qreg.size) if arg.index is None else [arg.index]
                for i in indices:
                    ref = self.qubit(qreg, i)
                    if ref not in qubits:
                        qubits.append(ref)
            sink.append(Barrier(tuple(qubits)))
        elif isinstance(stmt, ast.IfStatement):
            creg = self.cregs[stmt.creg]
            body_ops: list[IrOp] = []
            self.lower_statement(stmt.body, body_ops)
            for op in body_ops:
                if isinstance(op, Inst):
                    sink.append(ConditionalRegion(creg.creg_id, stmt.value, op))
                else:
                    # Barriers inside a conditioned macro stay unconditioned fences.
                    sink.append(op)
        else:
            raise TypeError(f"not a statement: {stmt!r}")

    def run(self) -> QuantumProgram:
        body: list[IrOp] = []
        for stmt in self.ast.statements:
            self.lower_statement(stmt, body)
        ops: list[IrOp] = [Qalloc(r) for r in self.registers]
        ops.extend(body)
        ops.extend(Dealloc(r) for r in reversed(self.registers))
        return QuantumProgram(self.registers, self.cregisters, ops)


def lower_ast_to_ir(program_ast: ast.QasmAst) -> QuantumProgram:
    """Expand and inline a validated AST into a flat QuantumProgram."""
    return _Lowering(program_ast).run()
