"""Dense statevector simulation for small qubit registers.

Basis ordering: index ``j`` of the amplitude array is the integer whose binary
expansion has qubit 0 as the most significant bit, so on three qubits the state
``|q0 q1 q2> = |100>`` lives at index 4.

States are immutable; every gate returns a new :class:`StateVector`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

MAX_QUBITS = 20


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise ConfigurationError(
                f"expected {2 ** self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """2x2 matrix of RY or RZ at angle ``theta``."""
    half = 0.5 * theta
    if axis == "Y":
        c, s = np.cos(half), np.sin(half)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if axis == "Z":
        return np.array(
            [[np.exp(-1j * half), 0.0], [0.0, np.exp(1j * half)]], dtype=np.complex128
        )
    raise ConfigurationError(f"unsupported rotation axis {axis!r}; use 'Y' or 'Z'")


def init_zero(n_qubits: int) -> StateVector:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits!r}")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def apply_matrix(state: StateVector, matrix: np.ndarray, qubit: int) -> StateVector:
    """Apply an arbitrary 2x2 matrix to one qubit."""
    _check_qubit(state, qubit)
    n = state.n_qubits
    psi = state.amplitudes.reshape(2 ** qubit, 2, 2 ** (n - qubit - 1))
    out = np.einsum("ij,ajb->aib", matrix, psi)
    return StateVector(n, out.reshape(-1))


def apply_rotation(state: StateVector, axis: str, qubit: int, theta: float) -> StateVector:
    if not np.isfinite(theta):
        raise ConfigurationError(f"rotation angle must be finite, got {theta!r}")
    return apply_matrix(state, rotation_matrix(axis, theta), qubit)


def apply_cx(state: StateVector, control: int, target: int) -> StateVector:
    """Controlled-NOT: flip ``target`` on every basis state where ``control`` is 1."""
    if control == target:
        raise ConfigurationError("control and target qubits must differ")
    _check_qubit(state, control)
    _check_qubit(state, target)
    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n).copy()
    sel = [slice(None)] * n
    sel[control] = 1
    sel = tuple(sel)
    # after fixing the control axis, the target axis shifts down by one if it came later
    t_axis = target - 1 if target > control else target
    psi[sel] = np.flip(psi[sel], axis=t_axis)
    return StateVector(n, psi.reshape(-1))


def probabilities(state: StateVector) -> np.ndarray:
    amps = state.amplitudes
    return amps.real ** 2 + amps.imag ** 2


def sample_outcomes(probs, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. basis indices from ``probs``."""
    p = np.asarray(probs, dtype=float)
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    if np.any(p < 0):
        raise ConfigurationError("probabilities must be nonnegative")
    p = p / p.sum()
    return rng.choice(p.size, size=count, p=p)
