"""Statevector simulator primitives.

Qubit 0 is the least significant bit of the basis index. Operations never
mutate their input state; each returns a fresh ``QuantumState``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotUnitary

MAX_QUBITS = 22
UNITARY_TOL = 1e-10

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by numpy's Philox generator, so identical keys reproduce the same
    draws on any platform. ``spawn`` derives independent child streams,
    which is how per-shot streams are handed out.
    """

    def __init__(self, seed: int, stream_id: int | Sequence[int] = ()):
        self.seed = int(seed)
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        self.stream_id = tuple(int(s) for s in stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def spawn(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(ids))

    def uniform(self) -> float:
        return float(self.generator.random())

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True, eq=False)
class QuantumState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.num_qubits,):
            raise ValueError(f"expected {1 << self.num_qubits} amplitudes, got {amps.shape}")
        if self.num_qubits > MAX_QUBITS:
            raise ValueError(f"{self.num_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = False) -> "QuantumState":
        vec = np.asarray(vec, dtype=np.complex128)
        n = int(np.log2(len(vec))) if len(vec) else -1
        if n < 0 or 1 << n != len(vec):
            raise ValueError("state length must be a power of two")
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(n, vec)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self, other: "QuantumState") -> "QuantumState":
        """``other`` occupies the high qubits, ``self`` the low ones."""
        amps = np.outer(other.amplitudes, self.amplitudes).reshape(-1)
        return QuantumState(self.num_qubits + other.num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_qubits(s: QuantumState, qubits: Sequence[int]) -> list[int]:
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubits must be distinct: {qubits}")
    for q in qubits:
        if not 0 <= q < s.num_qubits:
            raise ValueError(f"qubit {q} out of range for {s.num_qubits}-qubit state")
    return qubits


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotUnitary("unitary must be a square matrix")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > tol:
        raise NotUnitary(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
    return u


def _apply_on_axes(tensor: np.ndarray, axes: list[int], u: np.ndarray) -> np.ndarray:
    """Contract ``u`` into ``tensor`` along ``axes`` (axes[0] = least significant bit of u)."""
    t = len(axes)
    ut = u.reshape([2] * (2 * t))
    # u's row/col index is big-endian over its reshaped axes, so reverse
    src = axes[::-1]
    out = np.tensordot(ut, tensor, axes=(list(range(t, 2 * t)), src))
    return np.moveaxis(out, list(range(t)), src)


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def basis_state(n: int, k: int) -> QuantumState:
    if not 0 <= k < (1 << n):
        raise ValueError(f"basis index {k} out of range for {n} qubits")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[k] = 1.0
    return QuantumState(n, amps)


def apply_unitary(s: QuantumState, targets: Sequence[int], u: np.ndarray,
                  check: bool = True) -> QuantumState:
    targets = _check_qubits(s, targets)
    u = check_unitary(u) if check else np.asarray(u, dtype=np.complex128)
    if u.shape[0] != 1 << len(targets):
        raise ValueError("unitary size does not match number of targets")
    n = s.num_qubits
    if n == 0 or not targets:
        return s
    tensor = s.amplitudes.reshape([2] * n)
    out = _apply_on_axes(tensor, [_axis(n, q) for q in targets], u)
    return QuantumState(n, np.ascontiguousarray(out).reshape(-1))


def apply_controlled(s: QuantumState, control: int, targets: Sequence[int], u: np.ndarray,
                     check: bool = True) -> QuantumState:
    """Apply ``u`` on ``targets`` in the subspace where ``control`` is 1."""
    targets = _check_qubits(s, targets)
    _check_qubits(s, [control])
    if control in targets:
        raise ValueError("control qubit overlaps targets")
    u = check_unitary(u) if check else np.asarray(u, dtype=np.complex128)
    if u.shape[0] != 1 << len(targets):
        raise ValueError("unitary size does not match number of targets")
    n = s.num_qubits
    tensor = s.amplitudes.reshape([2] * n).copy()
    cax = _axis(n, control)
    index = (slice(None),) * cax + (1,)
    sub_axes = [a - (a > cax) for a in (_axis(n, q) for q in targets)]
    tensor[index] = _apply_on_axes(tensor[index], sub_axes, u)
    return QuantumState(n, tensor.reshape(-1))


def _register_view(s: QuantumState, qubits: list[int]) -> np.ndarray:
    """Amplitudes as (rest, 2**m) with the register index last, qubits[0] = LSB."""
    n = s.num_qubits
    m = len(qubits)
    if qubits == list(range(n - m, n)):
        return s.amplitudes.reshape(1 << m, -1).T, None
    tensor = s.amplitudes.reshape([2] * n)
    src = [_axis(n, q) for q in qubits[::-1]]
    moved = np.moveaxis(tensor, src, list(range(n - len(qubits), n)))
    return moved.reshape(-1, 1 << len(qubits)), src


def _from_register_view(view: np.ndarray, n: int, qubits: list[int], src) -> np.ndarray:
    m = len(qubits)
    if src is None:
        return np.ascontiguousarray(view.T).reshape(-1)
    moved = view.reshape([2] * n)
    return np.moveaxis(moved, list(range(n - m, n)), src).reshape(-1)


def _fourier(s: QuantumState, qubits: Sequence[int], inverse: bool) -> QuantumState:
    qubits = _check_qubits(s, qubits)
    if not qubits:
        return s
    view, src = _register_view(s, qubits)
    # inverse QFT maps sum_k e^{2 pi i theta k}|k> to |theta 2^m>, i.e. a forward DFT
    f = np.fft.fft if inverse else np.fft.ifft
    out = f(view, axis=1, norm="ortho")
    return QuantumState(s.num_qubits, _from_register_view(out, s.num_qubits, qubits, src))


def qft(s: QuantumState, qubits: Sequence[int]) -> QuantumState:
    """|k> -> 2^{-m/2} sum_y e^{+2 pi i k y / 2^m} |y> on the register (qubits[0] = LSB)."""
    return _fourier(s, qubits, inverse=False)


def inverse_qft(s: QuantumState, qubits: Sequence[int]) -> QuantumState:
    return _fourier(s, qubits, inverse=True)


def register_probabilities(s: QuantumState, qubits: Sequence[int]) -> np.ndarray:
    qubits = _check_qubits(s, qubits)
    view, _ = _register_view(s, qubits)
    probs = (np.abs(view) ** 2).sum(axis=0)
    return probs / probs.sum()


def draw_index(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw of an index from ``probs`` given a uniform ``u`` in [0, 1)."""
    cdf = np.cumsum(probs)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    k = min(k, len(probs) - 1)
    while probs[k] == 0 and k > 0:
        k -= 1
    return k


def measure_register(s: QuantumState, qubits: Sequence[int],
                     rng: RngStream) -> tuple[int, QuantumState]:
    """Born-rule measurement of ``qubits``; returns the outcome and collapsed state."""
    qubits = _check_qubits(s, qubits)
    view, src = _register_view(s, qubits)
    probs = (np.abs(view) ** 2).sum(axis=0)
    outcome = draw_index(probs, rng.uniform())
    post = np.zeros_like(view)
    post[:, outcome] = view[:, outcome] / np.sqrt(probs[outcome])
    return outcome, QuantumState(s.num_qubits, _from_register_view(post, s.num_qubits, qubits, src))


def sample_counts(s: QuantumState, shots: int, rng: RngStream) -> np.ndarray:
    """Multinomial sample of basis indices; returns a count per index."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = s.probabilities()
    p = p / p.sum()
    return rng.generator.multinomial(shots, p)


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
