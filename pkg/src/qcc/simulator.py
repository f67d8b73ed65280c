"""Dense statevector simulation for equivalence checking.

This is the verification oracle for the optimizer, the router and the QIR
round trip.  It is deliberately unitary-only: measurements, resets and
classically conditioned gates raise OracleError, and the qubit count is capped
at 20 so a forgotten register size cannot allocate gigabytes.

State indexing convention: qubit 0 is the least significant bit of the
amplitude index, so |q2 q1 q0> = |110> has index 6.
"""

from __future__ import annotations

import numpy as np

from . import gates
from .errors import DimensionMismatchError, InvalidPermutationError, OracleError
from .ir import Barrier, ConditionalRegion, Dealloc, FusedUnitary, Inst, Qalloc, QRTFinalize, QRTInit, QuantumProgram, QubitRef

MAX_QUBITS = 20


def apply_gate(state: np.ndarray, matrix: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a k-qubit matrix to the named qubits of an n-qubit state.

    Matrix rows index operand 0 as the most significant bit, matching the
    tables in gates.py.
    """
    k = len(qubits)
    psi = state.reshape([2] * n)
    # Axis j of the reshaped state holds qubit n-1-j.
    state_axes = [n - 1 - q for q in qubits]
    op = np.asarray(matrix, dtype=complex).reshape([2] * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), state_axes))
    out = np.moveaxis(out, list(range(k)), state_axes)
    return out.reshape(-1)


def _gate_stream(obj) -> tuple[int, list[tuple[str, tuple[float, ...], tuple[int, ...], object]]]:
    """Normalize a QuantumProgram or gate record list to (n_qubits, gate tuples)."""
    if isinstance(obj, QuantumProgram):
        stream = []
        for op in obj.ops:
            if isinstance(op, (Qalloc, Dealloc, QRTInit, QRTFinalize, Barrier)):
                continue
            if isinstance(op, ConditionalRegion):
                raise OracleError("conditional regions are not simulable in unitary mode")
            if isinstance(op, FusedUnitary):
                stream.append(("fused", (), (op.qubit.logical_id,), op.matrix))
                continue
            if isinstance(op, Inst):
                if op.result is not None or op.name in ("measure", "reset"):
                    raise OracleError(f"'{op.name}' is not simulable in unitary mode")
                qubits = tuple(q.logical_id for q in op.qubits)
                stream.append((op.name, op.params, qubits, None))
                continue
            raise OracleError(f"cannot simulate op {op!r}")
        return obj.n_qubits, stream

    stream = []
    highest = -1
    for g in obj:
        qubits = getattr(g, "operands", None)
        if qubits is None:
            qubits = getattr(g, "qubits", None)
        if qubits is None:
            raise OracleError(f"cannot interpret gate record {g!r}")
        qubits = tuple(q.logical_id if isinstance(q, QubitRef) else int(q) for q in qubits)
        name = g.name
        if name in ("measure", "reset") or getattr(g, "result", None) is not None:
            raise OracleError(f"'{name}' is not simulable in unitary mode")
        if getattr(g, "condition", None) is not None:
            raise OracleError("conditional gates are not simulable in unitary mode")
        params = tuple(getattr(g, "params", ()) or ())
        stream.append((name, params, qubits, getattr(g, "matrix", None)))
        highest = max(highest, max(qubits))
    return highest + 1, stream


def simulate(program, n_qubits: int | None = None) -> np.ndarray:
    """Statevector of a program or gate list applied to |0...0>.

    n_qubits may widen the register beyond what the gates touch (extra qubits
    stay |0>); it may not shrink it.
    """
    needed, stream = _gate_stream(program)
    n = needed if n_qubits is None else n_qubits
    if n < needed:
        raise OracleError(f"program touches {needed} qubits, got n_qubits={n}")
    if n > MAX_QUBITS:
        raise OracleError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit simulation cap")
    if n == 0:
        return np.ones(1, dtype=complex)

    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for name, params, qubits, matrix in stream:
        if matrix is None:
            matrix = gates.unitary(name, params)
        state = apply_gate(state, matrix, qubits, n)
    return state


def equiv_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff two unit-norm statevectors agree up to a global phase."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"statevector sizes differ: {a.shape} vs {b.shape}")
    return bool(abs(np.vdot(a, b)) >= 1.0 - tol)


def permute_qubits(state: np.ndarray, perm: list[int]) -> np.ndarray:
    """Relabel qubits: bit l of each index moves to bit perm[l].

    perm must be a bijection on 0..n-1 where the state has 2^n amplitudes.
    """
    n = int(np.log2(len(state)))
    if 2**n != len(state):
        raise DimensionMismatchError(f"state length {len(state)} is not a power of two")
    if sorted(perm) != list(range(n)):
        raise InvalidPermutationError(f"{perm} is not a permutation of 0..{n - 1}")
    idx = np.arange(len(state))
    target = np.zeros_like(idx)
    for src, dst in enumerate(perm):
        target |= ((idx >> src) & 1) << dst
    out = np.empty_like(np.asarray(state, dtype=complex))
    out[target] = state
    return out
