"""Exact classical spectral oracle and spectral bisection.

The dense eigensolver is deliberately O(N^3); it is the ground truth the
quantum pipeline is checked against, and a standalone partitioner for
graphs small enough to diagonalize.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DisconnectedGraph, OracleCapExceeded
from .graph import Graph, LaplacianMatrix, Partition, build_laplacian, connected_components, cut_size

DEFAULT_ORACLE_CAP = 4096
ZERO_TOL = 1e-8
CLUSTER_GAP = 1e-9
SIGN_TOL = 1e-9


def oracle_cap() -> int:
    return int(os.environ.get("QLAP_ORACLE_CAP", DEFAULT_ORACLE_CAP))


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    num_zero: int
    divisor: float = 1.0

    def to_dict(self, full: bool = False) -> dict:
        out = {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "num_zero": int(self.num_zero),
        }
        if full:
            out["eigenvectors"] = [[float(x) for x in col] for col in self.eigenvectors.T]
        return out


def fix_sign(v: np.ndarray, tol: float = SIGN_TOL) -> np.ndarray:
    """Flip ``v`` so its first component with ``|x| > tol`` is positive."""
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def canonical_basis(q: np.ndarray, k: int | None = None, tol: float = 1e-6) -> np.ndarray:
    """Deterministic orthonormal basis for the column span of ``q``.

    Projects e_0, e_1, ... onto the span in order and Gram-Schmidts the
    projections, skipping any whose residual is below ``tol``. The result
    does not depend on which basis of the subspace ``q`` happened to hold.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim == 1:
        q = q[:, None]
    k = q.shape[1] if k is None else k
    chosen: list[np.ndarray] = []
    for i in range(q.shape[0]):
        w = q @ q[i, :]
        for _ in range(2):
            for b in chosen:
                w = w - (b @ w) * b
        norm = np.linalg.norm(w)
        if norm > tol:
            chosen.append(fix_sign(w / norm))
            if len(chosen) == k:
                break
    return np.column_stack(chosen) if chosen else np.zeros((q.shape[0], 0))


def eig_sym(lap: LaplacianMatrix | np.ndarray, zero_tol: float = ZERO_TOL) -> SpectralResult:
    """Full spectrum, ascending, with a canonical eigenbasis.

    Eigenvalues closer than ``CLUSTER_GAP`` (unnormalized scale) are treated
    as one degenerate cluster whose basis is replaced by ``canonical_basis``.
    """
    if isinstance(lap, LaplacianMatrix):
        a = lap.dense()
        scale = lap.divisor
    else:
        a = np.asarray(lap, dtype=np.float64)
        scale = 1.0
    n = a.shape[0]
    cap = oracle_cap()
    if n > cap:
        raise OracleCapExceeded(n, cap)
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    w, v = _kernels.symeig(a)
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]

    start = 0
    while start < n:
        stop = start + 1
        while stop < n and (w[stop] - w[stop - 1]) * scale < CLUSTER_GAP:
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = canonical_basis(v[:, start:stop])
        else:
            v[:, start] = fix_sign(v[:, start])
        start = stop

    num_zero = int(np.count_nonzero(w * scale < zero_tol))
    return SpectralResult(eigenvalues=w, eigenvectors=v, num_zero=num_zero, divisor=scale)


def fiedler(lap: LaplacianMatrix | np.ndarray) -> tuple[float, np.ndarray]:
    res = eig_sym(lap)
    if res.num_zero != 1:
        raise DisconnectedGraph(res.num_zero)
    if len(res.eigenvalues) < 2:
        raise ValueError("a single vertex has no Fiedler pair")
    return float(res.eigenvalues[1]), res.eigenvectors[:, 1].copy()


def sign_bisect(v: np.ndarray, g: Graph | None = None, tie_tol: float = SIGN_TOL) -> Partition:
    """Block 0 holds positive (and tied, |v_i| <= tie_tol) entries, block 1 the negatives."""
    v = np.asarray(v, dtype=np.float64)
    labels = (v < -tie_tol).astype(int)
    if labels.all():
        labels[:] = 0
    k = int(labels.max(initial=0)) + 1
    cut = cut_size(g, Partition(tuple(labels), k)) if g is not None else None
    return Partition(tuple(labels), k, cut)


def spectral_embed(lap: LaplacianMatrix | np.ndarray, n_c: int) -> np.ndarray:
    res = eig_sym(lap)
    n = len(res.eigenvalues)
    if not 1 <= n_c <= n:
        raise ValueError(f"n_c must be in [1, {n}]")
    return res.eigenvectors[:, :n_c].copy()


def recursive_bisect(g: Graph, k: int) -> Partition:
    """Split the largest block by its Fiedler sign pattern until ``k`` blocks exist.

    Disconnected inputs start from their components. If there are more
    components than ``k``, the largest ``k - 1`` stay separate and the rest
    are merged.
    """
    n = g.num_real
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    real = g if g.ghost_count == 0 else g.induced(range(n))[0]
    count, labels = connected_components(real)
    blocks = [list(np.flatnonzero(labels == c)) for c in range(count)]
    if len(blocks) > k:
        blocks.sort(key=lambda b: (-len(b), b[0]))
        blocks = blocks[: k - 1] + [sorted(x for b in blocks[k - 1 :] for x in b)]

    while len(blocks) < k:
        idx = max(range(len(blocks)), key=lambda i: (len(blocks[i]), -blocks[i][0]))
        block = blocks.pop(idx)
        sub, old = real.induced(block)
        sub_count, sub_labels = connected_components(sub)
        if sub_count > 1:
            first = [old[i] for i in np.flatnonzero(sub_labels == 0)]
            rest = [old[i] for i in np.flatnonzero(sub_labels != 0)]
        else:
            _, vec = fiedler(build_laplacian(sub))
            part = sign_bisect(vec)
            first = [old[i] for i, b in enumerate(part.assignment) if b == 0]
            rest = [old[i] for i, b in enumerate(part.assignment) if b == 1]
        blocks += [first, rest]

    blocks.sort(key=lambda b: min(b))
    assignment = [0] * n
    for label, b in enumerate(blocks):
        for v in b:
            assignment[v] = label
    p = Partition(tuple(assignment), len(blocks))
    return Partition(p.assignment, p.num_blocks, cut_size(g, p))
