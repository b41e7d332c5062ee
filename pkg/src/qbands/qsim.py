"""Exact statevector simulation: gates, the two variational circuits, and
analytic expectation values.

States are complex amplitude vectors over 2**n basis states; bitstring b
indexes the amplitude with qubit 1 as the least significant bit.  Qubit
indices throughout are 1-based to match the bitstring convention.

Gate conventions: RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .pauli import SpectralDecomposition, pauli_words, word_matrix_stack

_SQRT2_INV = 1.0 / np.sqrt(2.0)

_FIXED_1Q = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
}


def _ry_matrix(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz_matrix(t: float) -> np.ndarray:
    return np.array([[np.exp(-1j * t / 2), 0], [0, np.exp(1j * t / 2)]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One circuit element; ``qubits`` are 1-based indices."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None


def ry(qubit: int, angle: float) -> Gate:
    return Gate("ry", (qubit,), float(angle))


def rz(qubit: int, angle: float) -> Gate:
    return Gate("rz", (qubit,), float(angle))


def h(qubit: int) -> Gate:
    return Gate("h", (qubit,))


def s(qubit: int) -> Gate:
    return Gate("s", (qubit,))


def z(qubit: int) -> Gate:
    return Gate("z", (qubit,))


def x(qubit: int) -> Gate:
    return Gate("x", (qubit,))


def cnot(control: int, target: int) -> Gate:
    if control == target:
        raise ValueError("CNOT control and target must differ")
    return Gate("cnot", (control, target))


def zero_state(n_qubits: int) -> np.ndarray:
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def num_qubits(state: np.ndarray) -> int:
    n = int(np.log2(len(state)))
    if 2**n != len(state):
        raise ValueError(f"state length {len(state)} is not a power of two")
    return n


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix of a single-qubit gate."""
    if gate.kind == "ry":
        return _ry_matrix(gate.angle)
    if gate.kind == "rz":
        return _rz_matrix(gate.angle)
    if gate.kind in _FIXED_1Q:
        return _FIXED_1Q[gate.kind]
    raise ValueError(f"{gate.kind} has no single-qubit matrix")


def _apply_1q(state: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    axis = n - qubit  # reshaped axis 0 holds the most significant bit
    v = np.moveaxis(state.reshape((2,) * n), axis, 0)
    shape = v.shape
    v = mat @ v.reshape(2, -1)
    return np.moveaxis(v.reshape(shape), 0, axis).reshape(-1)


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    v = state.reshape((2,) * n).copy()
    ic, it = n - control, n - target
    sel0 = [slice(None)] * n
    sel0[ic] = 1
    sel1 = list(sel0)
    sel0[it], sel1[it] = 0, 1
    v[tuple(sel0)], v[tuple(sel1)] = v[tuple(sel1)].copy(), v[tuple(sel0)].copy()
    return v.reshape(-1)


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Unitary action of one gate; returns a new statevector."""
    n = num_qubits(state)
    for q in gate.qubits:
        if not 1 <= q <= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    if gate.kind == "cnot":
        return _apply_cnot(state, gate.qubits[0], gate.qubits[1], n)
    return _apply_1q(state, gate_matrix(gate), gate.qubits[0], n)


def apply_circuit(state: np.ndarray, gates) -> np.ndarray:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


# ---------------------------------------------------------------------------
# Variational circuits


def prepare_meanfield(theta: float, phi: float) -> np.ndarray:
    """Single-qubit trial state cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>.

    Built as RZ(φ)·RY(θ)|0> with the global phase fixed so that the |0>
    amplitude equals cos(θ/2) exactly.
    """
    state = apply_circuit(zero_state(1), [ry(1, theta), rz(1, phi)])
    return state * np.exp(1j * phi / 2)


def meanfield_batch(angles: np.ndarray) -> np.ndarray:
    """Vectorised prepare_meanfield for an (N, 2) array of (θ, φ) rows."""
    angles = np.asarray(angles, dtype=float)
    th, ph = angles[:, 0], angles[:, 1]
    out = np.empty((len(angles), 2), dtype=complex)
    out[:, 0] = np.cos(th / 2)
    out[:, 1] = np.exp(1j * ph) * np.sin(th / 2)
    return out


# Three-qubit circuit layout: three rotation layers (RY then RZ on every
# qubit) separated by CNOT(1->2), CNOT(2->3) entanglers.
THREE_QUBIT_LAYERS = 3
THREE_QUBIT_PARAMS = 6 * THREE_QUBIT_LAYERS


def three_qubit_template(thetas) -> list[Gate]:
    """Gate list of the three-qubit variational circuit for given angles."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (THREE_QUBIT_PARAMS,):
        raise ValueError(
            f"expected {THREE_QUBIT_PARAMS} parameters, got shape {thetas.shape}"
        )
    gates: list[Gate] = []
    for layer in range(THREE_QUBIT_LAYERS):
        o = 6 * layer
        gates.extend(ry(q, thetas[o + q - 1]) for q in (1, 2, 3))
        gates.extend(rz(q, thetas[o + 2 + q]) for q in (1, 2, 3))
        if layer < THREE_QUBIT_LAYERS - 1:
            gates.append(cnot(1, 2))
            gates.append(cnot(2, 3))
    return gates


def prepare_three_qubit(thetas) -> np.ndarray:
    """Three-qubit trial state from |000> under the layered circuit."""
    return apply_circuit(zero_state(3), three_qubit_template(thetas))


@lru_cache(maxsize=1)
def _three_qubit_entangler() -> np.ndarray:
    dim = 8
    M = np.zeros((dim, dim))
    for b in range(dim):
        c = b ^ 2 if b & 1 else b  # CNOT(1 -> 2)
        c = c ^ 4 if c & 2 else c  # CNOT(2 -> 3)
        M[c, b] = 1.0
    return M


def three_qubit_batch(thetas: np.ndarray) -> np.ndarray:
    """Vectorised prepare_three_qubit for a (N, 18) parameter array."""
    T = np.asarray(thetas, dtype=float)
    if T.ndim != 2 or T.shape[1] != THREE_QUBIT_PARAMS:
        raise ValueError(f"expected (N, {THREE_QUBIT_PARAMS}) parameters")
    ent = _three_qubit_entangler()
    B = T.shape[0]
    psi = np.zeros((B, 8), dtype=complex)
    psi[:, 0] = 1.0
    for layer in range(THREE_QUBIT_LAYERS):
        o = 6 * layer
        cy = np.cos(T[:, o : o + 3] / 2)
        sy = np.sin(T[:, o : o + 3] / 2)
        ez = np.exp(-1j * T[:, o + 3 : o + 6] / 2)
        u = np.empty((B, 3, 2, 2), dtype=complex)  # u_q = RZ @ RY per qubit
        u[:, :, 0, 0] = ez * cy
        u[:, :, 0, 1] = -ez * sy
        u[:, :, 1, 0] = ez.conj() * sy
        u[:, :, 1, 1] = ez.conj() * cy
        v = psi.reshape(B, 2, 2, 2)  # axes: qubit 3, qubit 2, qubit 1
        v = np.einsum("bqp,bijp->bijq", u[:, 0], v)
        v = np.einsum("bqp,bipk->biqk", u[:, 1], v)
        v = np.einsum("bqp,bpjk->bqjk", u[:, 2], v)
        psi = v.reshape(B, 8)
        if layer < THREE_QUBIT_LAYERS - 1:
            psi = psi @ ent.T
    return psi


@dataclass(frozen=True)
class Ansatz:
    """A parameterised state-preparation family."""

    name: str
    n_qubits: int
    n_params: int
    lows: tuple[float, ...]
    highs: tuple[float, ...]
    prepare: Callable[[np.ndarray], np.ndarray]
    prepare_batch: Callable[[np.ndarray], np.ndarray]

    def random_parameters(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lows, self.highs)


MEAN_FIELD = Ansatz(
    name="mean-field",
    n_qubits=1,
    n_params=2,
    lows=(0.0, -np.pi),
    highs=(np.pi, np.pi),
    prepare=lambda t: prepare_meanfield(t[0], t[1]),
    prepare_batch=meanfield_batch,
)

THREE_QUBIT = Ansatz(
    name="three-qubit",
    n_qubits=3,
    n_params=THREE_QUBIT_PARAMS,
    lows=(-np.pi,) * THREE_QUBIT_PARAMS,
    highs=(np.pi,) * THREE_QUBIT_PARAMS,
    prepare=prepare_three_qubit,
    prepare_batch=three_qubit_batch,
)


def ansatz_for(n_qubits: int) -> Ansatz:
    if n_qubits == 1:
        return MEAN_FIELD
    if n_qubits == 3:
        return THREE_QUBIT
    raise ValueError(f"no ansatz available for {n_qubits} qubits")


# ---------------------------------------------------------------------------
# Analytic expectation values


def exact_expectation(state: np.ndarray, decomp: SpectralDecomposition) -> float:
    """sum_w c_w <ψ|σ_w|ψ>, evaluated word by word on the statevector."""
    n = num_qubits(state)
    if n != decomp.n_qubits:
        raise ValueError(
            f"state has {n} qubits but decomposition has {decomp.n_qubits}"
        )
    words = pauli_words(n)
    index = {w: i for i, w in enumerate(words)}
    stack = word_matrix_stack(n)
    total = 0.0
    for word, c in decomp.coeffs.items():
        sigma = stack[index[word]]
        total += c * float(np.real(np.vdot(state, sigma @ state)))
    return total


def exact_pauli_expectations(state: np.ndarray) -> dict[str, float]:
    """All 4**n word expectations <ψ|σ_w|ψ> of a statevector."""
    n = num_qubits(state)
    stack = word_matrix_stack(n)
    vals = np.real(np.einsum("i,wij,j->w", state.conj(), stack, state))
    return {w: float(v) for w, v in zip(pauli_words(n), vals)}
