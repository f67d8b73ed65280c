from .codegen import QirModule, emit_qir, verify_qir_text
from .extractor import ExtractedGate, extract_circuit, find_quantum_kernels

__all__ = [
    "QirModule",
    "emit_qir",
    "verify_qir_text",
    "ExtractedGate",
    "extract_circuit",
    "find_quantum_kernels",
]
