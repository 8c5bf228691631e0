"""Graphs, Laplacians and partitions.

Vertices are ``0..N-1``. Padding adds isolated "ghost" vertices at the top
of the index range so the dimension becomes a power of two; ghosts never
carry edges and are excluded from component counts and partitions.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import GraphFormatError, SelfLoopError


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    ghost_count: int = 0

    def __post_init__(self):
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = sorted({(min(u, v), max(u, v)) for u, v in self.edges})
        for u, v in canon:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if u < 0 or v >= self.num_vertices:
                raise ValueError(f"edge ({u}, {v}) out of range for N={self.num_vertices}")
        if not 0 <= self.ghost_count < self.num_vertices:
            raise ValueError("ghost_count must leave at least one real vertex")
        first_ghost = self.num_vertices - self.ghost_count
        if any(v >= first_ghost for _, v in canon):
            raise ValueError("ghost vertices must be isolated")
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def num_real(self) -> int:
        return self.num_vertices - self.ghost_count

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Subgraph on ``vertices`` relabelled 0..k-1, plus the old labels."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        sub = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph(len(keep), tuple(sub)), keep

    def to_edge_list(self) -> str:
        lines = [f"N {self.num_real}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LaplacianMatrix:
    """Graph Laplacian ``D - A``, optionally divided by ``divisor``."""

    entries: sp.csr_array
    max_degree: int
    edges: tuple[tuple[int, int], ...]
    divisor: float = 1.0
    is_normalized: bool = False
    ghost_count: int = 0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of row ``i``."""
        lo, hi = self.entries.indptr[i], self.entries.indptr[i + 1]
        return self.entries.indices[lo:hi], self.entries.data[lo:hi]


@dataclass(frozen=True)
class Partition:
    assignment: tuple[int, ...]
    num_blocks: int
    cut_edges: int | None = None

    def __post_init__(self):
        labels = set(self.assignment)
        if labels != set(range(self.num_blocks)):
            raise ValueError("partition labels must be contiguous 0..num_blocks-1")
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))

    @classmethod
    def from_labels(cls, labels: Iterable[int], g: Graph | None = None) -> "Partition":
        """Relabel blocks by first appearance so labels are contiguous."""
        remap: dict[int, int] = {}
        out = []
        for lab in labels:
            out.append(remap.setdefault(int(lab), len(remap)))
        p = cls(tuple(out), len(remap))
        if g is not None:
            p = cls(p.assignment, p.num_blocks, cut_size(g, p))
        return p

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for v, b in enumerate(self.assignment):
            out[b].append(v)
        return out

    def same_up_to_relabel(self, other: "Partition") -> bool:
        return sorted(map(tuple, self.blocks())) == sorted(map(tuple, other.blocks()))

    def to_dict(self) -> dict:
        return {
            "num_vertices": len(self.assignment),
            "assignment": list(self.assignment),
            "num_blocks": self.num_blocks,
            "cut_edges": self.cut_edges,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def scan_edge_list(lines: Iterable[str]):
    """Validate an edge list line by line.

    Yields ``("N", count)`` for the header and ``("edge", u, v)`` for every
    edge line (duplicates included). Raises ``GraphFormatError`` with the
    offending line number.
    """
    declared: int | None = None
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "N" and not seen_data and declared is None:
            if len(tokens) != 2:
                raise GraphFormatError("header must be 'N <count>'", lineno)
            declared = _parse_int(tokens[1], lineno)
            if declared < 1:
                raise GraphFormatError("vertex count must be positive", lineno)
            yield ("N", declared)
            continue
        seen_data = True
        if len(tokens) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        u, v = (_parse_int(t, lineno) for t in tokens)
        if u == v:
            raise SelfLoopError(f"self-loop on vertex {u}", lineno)
        if declared is not None and max(u, v) >= declared:
            raise GraphFormatError(f"endpoint {max(u, v)} >= declared N={declared}", lineno)
        yield ("edge", u, v)


def parse_edge_list(text: str | TextIO) -> Graph:
    """Read an edge list: ``u v`` per line, ``#`` comments, optional ``N <count>`` header."""
    if isinstance(text, str):
        text = io.StringIO(text)
    declared: int | None = None
    edges: set[tuple[int, int]] = set()
    max_index = -1
    for item in scan_edge_list(text):
        if item[0] == "N":
            declared = item[1]
            continue
        _, u, v = item
        max_index = max(max_index, u, v)
        edges.add((min(u, v), max(u, v)))
    n = declared if declared is not None else max_index + 1
    if n < 1:
        raise GraphFormatError("no vertices: empty edge list without an 'N' header")
    return Graph(n, tuple(edges))


def _parse_int(token: str, lineno: int) -> int:
    try:
        value = int(token, 10)
    except ValueError:
        raise GraphFormatError(f"non-integer token {token!r}", lineno) from None
    if value < 0:
        raise GraphFormatError(f"negative vertex index {value}", lineno)
    return value


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse_edge_list(fh)


def build_laplacian(g: Graph) -> LaplacianMatrix:
    n = g.num_vertices
    deg = g.degrees()
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [deg.astype(np.float64)]
    if g.edges:
        e = np.asarray(g.edges, dtype=np.int64)
        rows += [e[:, 0], e[:, 1]]
        cols += [e[:, 1], e[:, 0]]
        vals += [-np.ones(len(e)), -np.ones(len(e))]
    mat = sp.coo_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    mat.eliminate_zeros()
    mat.sort_indices()
    return LaplacianMatrix(
        entries=mat,
        max_degree=int(deg.max(initial=0)),
        edges=g.edges,
        ghost_count=g.ghost_count,
    )


def next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length()


def pad_to_power_of_two(g: Graph) -> Graph:
    target = next_power_of_two(g.num_vertices)
    if target == g.num_vertices:
        return g
    return Graph(target, g.edges, g.ghost_count + target - g.num_vertices)


def gershgorin_divisor(max_degree: int) -> int:
    """Smallest power of two strictly above the Gershgorin bound 2*max_degree."""
    if max_degree == 0:
        return 1
    return 1 << math.ceil(math.log2(2 * max_degree + 1))


def normalize_laplacian(lap: LaplacianMatrix, mode: str = "gershgorin_pow2") -> LaplacianMatrix:
    """Scale so every eigenvalue lies in [0, 1).

    ``gershgorin_pow2`` keeps integer spectra dyadic; ``exact`` divides by
    the true top eigenvalue times ``1 + 2**-20``.
    """
    if lap.is_normalized:
        raise ValueError("Laplacian is already normalized")
    if mode in ("gershgorin_pow2", "gershgorin"):
        c = float(gershgorin_divisor(lap.max_degree))
    elif mode == "exact":
        from .spectral import eig_sym

        top = float(eig_sym(lap).eigenvalues[-1])
        c = top * (1.0 + 2.0**-20) if top > 0 else 1.0
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return LaplacianMatrix(
        entries=(lap.entries / c).tocsr(),
        max_degree=lap.max_degree,
        edges=lap.edges,
        divisor=c,
        is_normalized=True,
        ghost_count=lap.ghost_count,
    )


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def connected_components(g: Graph) -> tuple[int, np.ndarray]:
    """Component count over non-ghost vertices and a label per vertex.

    Labels are numbered by smallest member; ghosts get ``-1``.
    """
    uf = UnionFind(g.num_vertices)
    for u, v in g.edges:
        uf.union(u, v)
    labels = np.full(g.num_vertices, -1, dtype=np.int64)
    root_label: dict[int, int] = {}
    for v in range(g.num_real):
        labels[v] = root_label.setdefault(uf.find(v), len(root_label))
    return len(root_label), labels


def cut_size(g: Graph, p: Partition) -> int:
    if len(p.assignment) != g.num_real:
        raise ValueError(
            f"partition covers {len(p.assignment)} vertices, graph has {g.num_real} non-ghost"
        )
    a = p.assignment
    if any(b < 0 or b >= p.num_blocks for b in a):
        raise ValueError("partition label out of range")
    return sum(1 for u, v in g.edges if a[u] != a[v])
