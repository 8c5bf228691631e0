import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlap.errors import GraphFormatError, SelfLoopError
from qlap.graph import (
    Graph,
    Partition,
    UnionFind,
    build_laplacian,
    connected_components,
    cut_size,
    gershgorin_divisor,
    next_power_of_two,
    normalize_laplacian,
    pad_to_power_of_two,
    parse_edge_list,
    read_graph,
)

from strategies import graphs


def test_parse_simple_path():
    g = parse_edge_list("0 1\n1 2")
    assert g.num_vertices == 3
    assert g.edges == ((0, 1), (1, 2))
    assert g.ghost_count == 0


def test_parse_dedupes_both_orders():
    g = parse_edge_list("0 1\n1 0\n0 1")
    assert g.num_vertices == 2
    assert g.edges == ((0, 1),)


def test_parse_self_loop_reports_line():
    with pytest.raises(SelfLoopError) as exc:
        parse_edge_list("0 0")
    assert exc.value.line == 1
    with pytest.raises(SelfLoopError) as exc:
        parse_edge_list("# header\n0 1\n\n2 2\n")
    assert exc.value.line == 4


def test_parse_header_comments_and_isolated_vertices():
    g = parse_edge_list("N 5  # five vertices\n# a comment\n\n0 1  # trailing\n")
    assert g.num_vertices == 5
    assert g.edges == ((0, 1),)


def test_parse_reads_from_stream():
    assert parse_edge_list(io.StringIO("0 1\n")).num_vertices == 2


@pytest.mark.parametrize(
    "text",
    ["0 x\n", "0 1.5\n", "0 -1\n", "N 2\n0 2\n", "0 1 2\n", "N\n", "N 0\n", "", "# only\n"],
)
def test_parse_rejects(text):
    with pytest.raises(GraphFormatError):
        parse_edge_list(text)


def test_header_only_graph_is_edgeless():
    g = parse_edge_list("N 4\n")
    assert g.num_vertices == 4 and g.edges == ()


def test_read_graph(tmp_path):
    p = tmp_path / "g.edges"
    p.write_text("0 1\n1 2\n2 0\n")
    assert read_graph(p).num_edges == 3


def test_graph_rejects_bad_construction():
    with pytest.raises(ValueError):
        Graph(2, ((0, 2),))
    with pytest.raises(ValueError):
        Graph(2, ((1, 1),))
    with pytest.raises(ValueError):
        Graph(4, ((0, 3),), ghost_count=1)
    with pytest.raises(ValueError):
        Graph(2, (), ghost_count=2)


def test_laplacian_of_path():
    lap = build_laplacian(Graph(3, ((0, 1), (1, 2))))
    expected = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], dtype=float)
    assert np.array_equal(lap.dense(), expected)
    assert lap.max_degree == 2
    assert not lap.is_normalized
    cols, vals = lap.row(1)
    assert list(cols) == [0, 1, 2] and list(vals) == [-1, 2, -1]


def test_laplacian_of_edgeless_is_zero():
    lap = build_laplacian(Graph(4, ()))
    assert not lap.dense().any()
    assert lap.max_degree == 0


@given(graphs())
def test_laplacian_invariants(g):
    lap = build_laplacian(g)
    a = lap.dense()
    assert np.array_equal(a, a.T)
    assert not a.sum(axis=1).any()
    assert np.array_equal(np.diag(a), g.degrees())
    off = a - np.diag(np.diag(a))
    assert int(-off.sum()) == 2 * g.num_edges
    assert np.linalg.eigvalsh(a).min() >= -1e-9


@given(graphs(max_n=12))
def test_normalized_spectrum_in_unit_interval(g):
    lap = normalize_laplacian(build_laplacian(g))
    w = np.linalg.eigvalsh(lap.dense())
    assert w.min() >= -1e-12 and w.max() < 1
    assert np.abs(lap.dense().sum(axis=1)).max() <= 1e-12
    assert lap.is_normalized


def test_normalize_modes():
    lap = build_laplacian(Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0))))
    assert normalize_laplacian(lap).divisor == 8
    ex = normalize_laplacian(lap, "exact")
    assert 4 < ex.divisor < 4 * (1 + 1e-5)
    assert np.linalg.eigvalsh(ex.dense()).max() < 1
    with pytest.raises(ValueError):
        normalize_laplacian(normalize_laplacian(lap))
    with pytest.raises(ValueError):
        normalize_laplacian(lap, "bogus")


@pytest.mark.parametrize("delta,expected", [(0, 1), (1, 4), (2, 8), (3, 8), (4, 16), (7, 16), (8, 32)])
def test_gershgorin_divisor(delta, expected):
    assert gershgorin_divisor(delta) == expected


def test_pad_barbell(barbell):
    pg = pad_to_power_of_two(barbell)
    assert pg.num_vertices == 8 and pg.ghost_count == 2 and pg.num_real == 6
    assert pg.edges == barbell.edges
    assert pad_to_power_of_two(Graph(4, ((0, 1),))) == Graph(4, ((0, 1),))
    assert pad_to_power_of_two(Graph(1, ())).num_vertices == 1


@given(st.integers(1, 5000))
def test_next_power_of_two(n):
    p = next_power_of_two(n)
    assert p >= n and p & (p - 1) == 0 and p < 2 * n


def test_connected_components_examples():
    count, labels = connected_components(Graph(4, ((0, 1), (2, 3))))
    assert count == 2 and list(labels) == [0, 0, 1, 1]
    count, labels = connected_components(Graph(4, ()))
    assert count == 4
    pg = pad_to_power_of_two(Graph(6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5))))
    count, labels = connected_components(pg)
    assert count == 1 and list(labels[-2:]) == [-1, -1]


@given(graphs(max_n=12))
def test_components_match_laplacian_kernel(g):
    count, _ = connected_components(g)
    w = np.linalg.eigvalsh(build_laplacian(g).dense())
    assert count == int((w < 1e-8).sum())


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 4)
    assert uf.find(0) == uf.find(3)
    assert uf.find(2) != uf.find(0)


def test_cut_size_examples(barbell):
    assert cut_size(barbell, Partition((0, 0, 0, 1, 1, 1), 2)) == 1
    assert cut_size(barbell, Partition((0,) * 6, 1)) == 0
    k3 = Graph(3, ((0, 1), (0, 2), (1, 2)))
    assert cut_size(k3, Partition((0, 1, 2), 3)) == 3
    with pytest.raises(ValueError):
        cut_size(barbell, Partition((0, 1), 2))


@given(graphs(min_n=2), st.data())
def test_cut_size_brute_force(g, data):
    labels = data.draw(st.lists(st.integers(0, 2), min_size=g.num_vertices, max_size=g.num_vertices))
    p = Partition.from_labels(labels, g)
    brute = sum(1 for u in range(g.num_vertices) for v in range(u + 1, g.num_vertices)
                if (u, v) in set(g.edges) and labels[u] != labels[v])
    assert p.cut_edges == brute
    assert set(p.assignment) == set(range(p.num_blocks))


def test_partition_validation_and_relabel():
    with pytest.raises(ValueError):
        Partition((0, 2), 2)
    a = Partition((0, 0, 1), 2)
    b = Partition((1, 1, 0), 2)
    assert a.same_up_to_relabel(b)
    assert not a.same_up_to_relabel(Partition((0, 1, 1), 2))
    assert a.to_dict() == {"num_vertices": 3, "assignment": [0, 0, 1], "num_blocks": 2,
                           "cut_edges": None}


def test_edge_list_round_trip(barbell):
    assert parse_edge_list(barbell.to_edge_list()) == barbell
