"""Time evolution ``U = exp(i L t)`` under a normalized Laplacian.

Two backends:

* ``exact``: ``V diag(exp(i lambda t)) V^T`` from the classical oracle.
* ``trotter``: product over edges of ``exp(i theta L_e)``. A single-edge
  Laplacian satisfies ``L_e @ L_e = 2 L_e``, so each factor is
  ``I + beta(theta) L_e`` with ``beta = (exp(2 i theta) - 1) / 2`` and touches
  only two amplitudes. Edges are swept in lexicographic order.

The system register always occupies qubits ``0..n-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NotNormalized
from .graph import LaplacianMatrix
from .qsim import QuantumState
from .spectral import SpectralResult, eig_sym

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EvolutionBackend:
    kind: str = "exact"
    trotter_steps: int = 64
    trotter_order: str = "first"
    t: float = TWO_PI
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("exact", "trotter"):
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.trotter_order not in ("first", "symmetric"):
            raise ValueError(f"unknown trotter order {self.trotter_order!r}")
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be >= 1")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "t": self.t, "epsilon": self.epsilon}
        if self.kind == "trotter":
            out.update(trotter_steps=self.trotter_steps, trotter_order=self.trotter_order)
        return out


def _require_normalized(lap: LaplacianMatrix) -> None:
    if not lap.is_normalized:
        raise NotNormalized("normalize the Laplacian first; raw eigenvalues alias under t=2*pi")


def exact_propagator(lap: LaplacianMatrix, t: float = TWO_PI,
                     spectrum: SpectralResult | None = None) -> np.ndarray:
    _require_normalized(lap)
    res = spectrum if spectrum is not None else eig_sym(lap)
    v = res.eigenvectors
    return (v * np.exp(1j * res.eigenvalues * t)) @ v.T


def edge_exponential(theta: float) -> complex:
    """Coefficient ``beta`` with ``exp(i theta L_e) = I + beta L_e``."""
    return (np.exp(2j * theta) - 1.0) / 2.0


def edge_block(theta: float) -> np.ndarray:
    """The 2x2 action of ``exp(i theta L_e)`` on ``(a_u, a_v)``."""
    b = edge_exponential(theta)
    return np.array([[1 + b, -b], [-b, 1 + b]], dtype=complex)


def _edge_arrays(lap: LaplacianMatrix) -> tuple[np.ndarray, np.ndarray]:
    if not lap.edges:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    e = np.asarray(lap.edges, dtype=np.int64)
    return np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])


def _trotter_inplace(rows: np.ndarray, lap: LaplacianMatrix, t: float, r: int, order: str,
                     repeat: int = 1) -> None:
    """Apply (one Trotter step of length t/r)^(r * repeat) to each row of ``rows``."""
    theta = t / (r * lap.divisor)
    symmetric = order == "symmetric"
    beta = edge_exponential(theta / 2 if symmetric else theta)
    us, vs = _edge_arrays(lap)
    if len(us):
        _kernels.trotter_rows(rows, us, vs, beta, r * repeat, symmetric)


def trotter_propagator_apply(s: QuantumState, lap: LaplacianMatrix, t: float = TWO_PI,
                             r: int = 64, order: str = "first") -> QuantumState:
    _require_normalized(lap)
    if s.dim != lap.dim:
        raise ValueError(f"state dimension {s.dim} != Laplacian dimension {lap.dim}")
    if r < 1:
        raise ValueError("r must be >= 1")
    rows = s.amplitudes.reshape(1, -1).copy()
    _trotter_inplace(rows, lap, t, r, order)
    return QuantumState(s.num_qubits, rows.reshape(-1))


def trotter_propagator_matrix(lap: LaplacianMatrix, t: float = TWO_PI, r: int = 64,
                              order: str = "first") -> np.ndarray:
    """Dense matrix of the Trotter product (column j is the image of e_j)."""
    _require_normalized(lap)
    rows = np.eye(lap.dim, dtype=np.complex128)
    _trotter_inplace(rows, lap, t, r, order)
    return rows.T.copy()


def operator_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral norm of ``a - b``."""
    return float(np.linalg.norm(a - b, ord=2))


def _controlled_rows(s: QuantumState, control: int, n_sys: int) -> tuple[np.ndarray, np.ndarray]:
    n = s.num_qubits
    if not n_sys <= control < n:
        raise ValueError(f"control qubit {control} must lie above the {n_sys}-qubit system register")
    amps = s.amplitudes.copy()
    view = amps.reshape(1 << (n - control - 1), 2, 1 << (control - n_sys), 1 << n_sys)
    return amps, view


def controlled_evolution_power(s: QuantumState, control: int, backend: EvolutionBackend,
                               lap: LaplacianMatrix, j: int,
                               spectrum: SpectralResult | None = None) -> QuantumState:
    """Controlled ``U^(2^j)`` with the system on qubits ``0..log2(dim)-1``.

    The trotter backend uses time ``2^j t`` with ``r * 2^j`` steps, keeping the
    per-step splitting error the same for every power.
    """
    _require_normalized(lap)
    n_sys = int(round(math.log2(lap.dim)))
    if 1 << n_sys != lap.dim or s.num_qubits < n_sys + 1:
        raise ValueError("system register does not match the Laplacian")
    amps, view = _controlled_rows(s, control, n_sys)
    block = view[:, 1].reshape(-1, lap.dim)
    power = 1 << j
    if backend.kind == "exact":
        res = spectrum if spectrum is not None else eig_sym(lap)
        v = res.eigenvectors
        u_pow = (v * np.exp(1j * res.eigenvalues * backend.t * power)) @ v.T
        block = block @ u_pow.T
    else:
        block = np.ascontiguousarray(block)
        _trotter_inplace(block, lap, backend.t, backend.trotter_steps, backend.trotter_order,
                         repeat=power)
    view[:, 1] = block.reshape(view[:, 1].shape)
    return QuantumState(s.num_qubits, amps)


_POWER_CACHE: dict = {}


def trotter_powers(lap: LaplacianMatrix, backend: EvolutionBackend, m: int) -> list[np.ndarray]:
    """Dense ``W^(2^j)`` for ``j < m``, ``W`` one Trotterized ``U`` of ``r`` steps.

    Built by repeated squaring, which is the same operator as sweeping
    ``r * 2^j`` steps. Cached per (graph, normalization, backend).
    """
    _require_normalized(lap)
    key = (lap.edges, lap.dim, lap.divisor, backend, m)
    powers = _POWER_CACHE.get(key)
    if powers is None:
        w = trotter_propagator_matrix(lap, backend.t, backend.trotter_steps, backend.trotter_order)
        powers = [w]
        for _ in range(1, m):
            powers.append(powers[-1] @ powers[-1])
        if len(_POWER_CACHE) > 32:
            _POWER_CACHE.clear()
        _POWER_CACHE[key] = powers
    return powers


def suggest_trotter_steps(lap: LaplacianMatrix, t: float = TWO_PI, epsilon: float = 1e-3,
                          order: str = "first") -> int:
    """Step count from the standard commutator bound for the edge splitting.

    Two edge terms fail to commute only when they share a vertex, and then
    ``||[L_a, L_b]|| <= 2 ||L_a|| ||L_b|| = 8`` before dividing by the
    normalization. First order: ``t^2/(2r) * sum ||[H_a, H_b]|| <= epsilon``.
    Symmetric order bounds each nested commutator by ``2 ||H_e|| = 4 / c`` times
    the same sum, giving ``t^3 / (12 r^2) * (4 / c) * sum <= epsilon``.
    """
    _require_normalized(lap)
    deg = np.zeros(lap.dim, dtype=np.int64)
    for u, v in lap.edges:
        deg[u] += 1
        deg[v] += 1
    touching = int((deg * (deg - 1) // 2).sum())
    comm = 8.0 * touching / lap.divisor**2
    if comm == 0:
        return 1
    if order == "first":
        return max(1, math.ceil(t * t * comm / (2 * epsilon)))
    return max(1, math.ceil(math.sqrt(t**3 * comm * 4.0 / (12 * lap.divisor * epsilon))))
