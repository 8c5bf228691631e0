"""The shipped graph corpus.

Named graphs are built in code; the random ones come from a seeded
generator so the shipped files can always be regenerated and checked.
"""

from __future__ import annotations

from importlib import resources
from itertools import combinations
from pathlib import Path

import numpy as np

from .graph import Graph, parse_edge_list

RANDOM_COUNT = 20
RANDOM_SEED_BASE = 20240
RANDOM_EDGE_PROB = 0.3
RANDOM_MAX_N = 16


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(combinations(range(n), 2)))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def barbell_graph() -> Graph:
    """Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3."""
    return Graph(6, ((0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)))


def two_triangles() -> Graph:
    return Graph(6, ((0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)))


def random_graph(seed: int, max_n: int = RANDOM_MAX_N, p: float = RANDOM_EDGE_PROB) -> Graph:
    """G(n, p) with n drawn uniformly from [4, max_n]."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, max_n + 1))
    keep = rng.random(n * (n - 1) // 2) < p
    edges = [e for e, k in zip(combinations(range(n), 2), keep) if k]
    return Graph(n, tuple(edges))


NAMED = {
    "p2": lambda: path_graph(2),
    "p3": lambda: path_graph(3),
    "c4": lambda: cycle_graph(4),
    "k4": lambda: complete_graph(4),
    "s4": lambda: star_graph(3),
    "barbell": barbell_graph,
    "two_triangles": two_triangles,
}

# graphs whose Laplacian spectrum is integer, so it is dyadic after gershgorin_pow2
INTEGER_SPECTRUM = ("p2", "p3", "c4", "k4", "s4", "two_triangles")


def random_names() -> list[str]:
    return [f"random_{i:02d}" for i in range(RANDOM_COUNT)]


def names() -> list[str]:
    return list(NAMED) + random_names()


def generate(name: str) -> Graph:
    if name in NAMED:
        return NAMED[name]()
    if name.startswith("random_"):
        i = int(name.split("_", 1)[1])
        if 0 <= i < RANDOM_COUNT:
            return random_graph(RANDOM_SEED_BASE + i)
    raise KeyError(f"unknown corpus graph {name!r}")


def _header(name: str) -> str:
    if name.startswith("random_"):
        i = int(name.split("_", 1)[1])
        return (f"# {name}: G(n, {RANDOM_EDGE_PROB}) with n in [4, {RANDOM_MAX_N}], "
                f"numpy default_rng({RANDOM_SEED_BASE + i})\n")
    return f"# {name}\n"


def render(name: str) -> str:
    return _header(name) + generate(name).to_edge_list()


def path(name: str) -> Path:
    """Filesystem path of a shipped corpus file."""
    if name not in names():
        raise KeyError(f"unknown corpus graph {name!r}")
    return Path(str(resources.files("qlap") / "corpus" / f"{name}.edges"))


def load(name: str) -> Graph:
    text = (resources.files("qlap") / "corpus" / f"{name}.edges").read_text(encoding="utf-8")
    return parse_edge_list(text)


def export(directory, which: list[str] | None = None) -> list[Path]:
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in which or names():
        target = out_dir / f"{name}.edges"
        target.write_text(render(name), encoding="utf-8")
        written.append(target)
    return written
