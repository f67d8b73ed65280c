"""qcc: a quantum-classical co-compilation toolchain.

Pipeline: OpenQASM 2.0 source -> quantum IR -> single-qubit fusion and Euler
resynthesis -> optional hardware-aware layout/routing -> textual QIR.  A
statevector oracle and a QIR circuit extractor close the loop for
verification, and a build driver stitches the quantum pipeline into a
multi-toolchain (C++/CUDA/MPI) build.
"""

from .errors import QccError
from .ir import QuantumProgram, build_dag, circuit_depth, gate_counts
from .qasm import lower_ast_to_ir, parse_qasm
from .simulator import equiv_up_to_global_phase, permute_qubits, simulate

__all__ = [
    "QccError",
    "QuantumProgram",
    "build_dag",
    "circuit_depth",
    "gate_counts",
    "parse_qasm",
    "lower_ast_to_ir",
    "simulate",
    "equiv_up_to_global_phase",
    "permute_qubits",
]

__version__ = "0.1.0"
