"""Gate matrix definitions.

Rotation conventions, fixed for the whole toolchain:

    Rz(t) = diag(e^{-it/2}, e^{it/2})
    Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
    Rx(t) = cos(t/2) I - i sin(t/2) X
    u3(t, p, l) = e^{i(p+l)/2} Rz(p) Ry(t) Rz(l)

Multi-qubit matrices index their rows with operand 0 as the most significant
bit, so cx acts on basis (control, target) and flips the target on the
|1x> block.  This is a property of the matrices only; statevector indexing
places qubit 0 in the least significant bit.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import UnknownGateError

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def rx(theta: float) -> np.ndarray:
    return math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * _X


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-1j * theta / 2), 0], [0, cmath.exp(1j * theta / 2)]])


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    return cmath.exp(1j * (phi + lam) / 2) * (rz(phi) @ ry(theta) @ rz(lam))


def u2(phi: float, lam: float) -> np.ndarray:
    return u3(math.pi / 2, phi, lam)


def u1(lam: float) -> np.ndarray:
    return u3(0.0, 0.0, lam)


_FIXED_1Q: dict[str, np.ndarray] = {
    "id": _I2,
    "x": _X,
    "y": _Y,
    "z": _Z,
    "h": _H,
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, cmath.exp(-1j * math.pi / 4)]),
}

_PARAM_1Q = {
    "rx": (rx, 1),
    "ry": (ry, 1),
    "rz": (rz, 1),
    "u1": (u1, 1),
    "u2": (u2, 2),
    "u3": (u3, 3),
}


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """2x2 matrix of a single-qubit gate from the known table."""
    if name in _FIXED_1Q:
        if params:
            raise UnknownGateError(f"gate '{name}' takes no parameters")
        return _FIXED_1Q[name].copy()
    if name in _PARAM_1Q:
        fn, arity = _PARAM_1Q[name]
        if len(params) != arity:
            raise UnknownGateError(f"gate '{name}' takes {arity} parameter(s), got {len(params)}")
        return fn(*params)
    raise UnknownGateError(f"unknown single-qubit gate '{name}'")


def _controlled(target: np.ndarray) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = target
    return m


def unitary(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Matrix of any gate in the vocabulary, including multi-qubit ones."""
    if name in _FIXED_1Q or name in _PARAM_1Q:
        return gate_matrix(name, params)
    if name == "cx":
        return _controlled(_X)
    if name == "cz":
        return _controlled(_Z)
    if name == "cy":
        return _controlled(_Y)
    if name == "ch":
        return _controlled(_H)
    if name == "crz":
        return _controlled(rz(*params))
    if name == "cu1":
        return _controlled(u1(*params))
    if name == "cu3":
        return _controlled(u3(*params))
    if name == "swap":
        m = np.eye(4, dtype=complex)
        m[[1, 2]] = m[[2, 1]]
        return m
    if name == "ccx":
        m = np.eye(8, dtype=complex)
        m[[6, 7]] = m[[7, 6]]
        return m
    raise UnknownGateError(f"no matrix known for gate '{name}'")


def gate_arity(name: str) -> tuple[int, int]:
    """(n_params, n_qubits) for every gate with a known matrix."""
    if name in _FIXED_1Q:
        return 0, 1
    if name in _PARAM_1Q:
        return _PARAM_1Q[name][1], 1
    table = {
        "cx": (0, 2),
        "cz": (0, 2),
        "cy": (0, 2),
        "ch": (0, 2),
        "swap": (0, 2),
        "crz": (1, 2),
        "cu1": (1, 2),
        "cu3": (3, 2),
        "ccx": (0, 3),
    }
    if name in table:
        return table[name]
    raise UnknownGateError(f"unknown gate '{name}'")


def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    """Frobenius-norm unitarity check."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.linalg.norm(matrix.conj().T @ matrix - eye) <= tol)
