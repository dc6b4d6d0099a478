import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biview import kg as kgmod
from biview.kg import DIRECTED, UNDIRECTED, GraphInputError, build_adjacency, class_counts, ingest

from conftest import adjacency, graph


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def abc(tmp_path):
    e = write(tmp_path / "e.csv", "src,rel,dst\na,r,b\nb,r,c\nc,r,a\n")
    lab = write(tmp_path / "l.csv", "node,class\na,X\nb,X\nc,Y\n")
    return e, lab


def test_ingest_small_cycle(abc):
    g = ingest(*abc)
    assert (g.n_nodes, g.n_edges, g.n_classes) == (3, 3, 2)
    assert g.node_ids == ("a", "b", "c")
    assert np.all(g.weight == 1.0)


def test_ingest_empty_edges_gives_isolated_labeled_nodes(tmp_path):
    e = write(tmp_path / "e.csv", "src,rel,dst,weight\n")
    lab = write(tmp_path / "l.csv", "node,class\nx,A\ny,B\n")
    g = ingest(e, lab)
    assert g.n_nodes == 2 and g.n_edges == 0
    assert list(g.labels) == [0, 1]


def test_label_only_nodes_are_added(tmp_path):
    e = write(tmp_path / "e.csv", "src,rel,dst\na,r,b\n")
    lab = write(tmp_path / "l.csv", "node,class\nz,A\n")
    g = ingest(e, lab)
    assert g.node_ids == ("a", "b", "z")
    assert g.labels.tolist() == [-1, -1, 0]
    assert build_adjacency(g).neighbors(2).size == 0


def test_weights_parsed(tmp_path):
    e = write(tmp_path / "e.csv", "src,rel,dst,weight\na,r,b,2.5\nb,r,c,\n")
    lab = write(tmp_path / "l.csv", "node,class\n")
    g = ingest(e, lab)
    assert g.weight.tolist() == [2.5, 1.0]


@pytest.mark.parametrize(
    "edges,labels,needle",
    [
        ("src,rel,dst\na,r\n", "node,class\n", ":2"),
        ("src,rel,dst,weight\na,r,b,0\n", "node,class\n", "weight"),
        ("src,rel,dst,weight\na,r,b,-1\n", "node,class\n", "weight"),
        ("src,rel,dst,weight\na,r,b,abc\n", "node,class\n", ":2"),
        ("src,rel,dst\na,r,b\n", "node,class\na,X\na,Y\n", "l.csv:3: .*already"),
        ("from,to\na,b\n", "node,class\n", "missing column"),
    ],
)
def test_ingest_errors(tmp_path, edges, labels, needle):
    e = write(tmp_path / "e.csv", edges)
    lab = write(tmp_path / "l.csv", labels)
    with pytest.raises(GraphInputError, match=needle):
        ingest(e, lab)


def test_duplicate_consistent_label_is_fine(tmp_path):
    e = write(tmp_path / "e.csv", "src,rel,dst\na,r,b\n")
    lab = write(tmp_path / "l.csv", "node,class\na,X\na,X\n")
    assert ingest(e, lab).labels[0] == 0


def test_class_counts():
    g = kgmod.from_triples([("a", "r", "b"), ("b", "r", "c")], {"a": "X", "b": "X", "c": "Y"})
    assert class_counts(g) == {0: 2, 1: 1}
    assert class_counts(kgmod.from_triples([("a", "r", "b")])) == {}


def test_invariants_enforced():
    g = graph([(0, 1)])
    with pytest.raises(ValueError):
        kgmod.KnowledgeGraph(g.node_ids, g.relations, g.classes, np.array([0]), np.array([0]),
                             np.array([5]), np.array([1.0]), g.labels)
    with pytest.raises(ValueError):
        kgmod.KnowledgeGraph(g.node_ids, g.relations, g.classes, g.src, g.rel, g.dst, np.array([0.0]), g.labels)
    with pytest.raises(ValueError):
        kgmod.KnowledgeGraph(("a", "a"), g.relations, g.classes, g.src, g.rel, g.dst, g.weight, g.labels)


def test_arrays_are_read_only():
    g = graph([(0, 1)])
    with pytest.raises(ValueError):
        g.weight[0] = 3.0


def test_json_round_trip(abc, tmp_path):
    g = ingest(*abc)
    doc = kgmod.to_json(g)
    assert doc["format"] == 1
    assert kgmod.from_json(json.loads(json.dumps(doc))) == g
    kgmod.save(g, tmp_path / "g.json")
    assert kgmod.load(tmp_path / "g.json") == g


def test_csv_round_trip_is_order_independent(tmp_path):
    rows = [("b", "r", "c"), ("a", "s", "b"), ("c", "r", "a")]
    e1 = write(tmp_path / "e1.csv", "src,rel,dst\n" + "".join(f"{s},{r},{d}\n" for s, r, d in rows))
    e2 = write(tmp_path / "e2.csv", "src,rel,dst\n" + "".join(f"{s},{r},{d}\n" for s, r, d in rows[::-1]))
    lab = write(tmp_path / "l.csv", "node,class\nc,Y\na,X\n")
    g1, g2 = ingest(e1, lab), ingest(e2, lab)
    assert g1.node_ids == g2.node_ids and g1.relations == g2.relations
    assert np.array_equal(build_adjacency(g1).to_scipy().toarray(), build_adjacency(g2).to_scipy().toarray())


def test_parallel_edges_sum():
    a = adjacency([(0, 1), (0, 1)], weights=[1.0, 2.0], mode=DIRECTED)
    assert a.weight(0, 1) == 3.0
    assert a.neighbors(0).tolist() == [1]


def test_undirected_symmetrizes():
    a = adjacency([(0, 1)])
    assert a.weight(0, 1) == a.weight(1, 0) == 1.0


def test_directed_respects_direction():
    a = adjacency([(0, 1)], mode=DIRECTED)
    assert a.has_edge(0, 1) and not a.has_edge(1, 0)
    assert a.neighbors(1).size == 0


def test_antiparallel_edges_collapse_by_summing():
    a = adjacency([(0, 1), (1, 0)], weights=[1.0, 4.0])
    assert a.weight(0, 1) == a.weight(1, 0) == 5.0


def test_self_loop_kept_once():
    a = adjacency([(0, 0), (0, 1)], weights=[2.0, 1.0])
    assert a.weight(0, 0) == 2.0
    assert a.neighbors(0).tolist() == [0, 1]


edge_lists = st.lists(
    st.tuples(st.integers(0, 7), st.integers(0, 7), st.floats(0.1, 5.0)), min_size=0, max_size=25
)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_adjacency_properties(rows):
    edges = [(i, j) for i, j, _ in rows]
    w = [x for *_, x in rows]
    g = graph(edges, n=8, weights=w)
    for mode in (UNDIRECTED, DIRECTED):
        a = build_adjacency(g, mode)
        b = build_adjacency(g, mode)
        assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.weights, b.weights)
        for v in range(8):
            nb = a.neighbors(v)
            assert np.all(np.diff(nb) > 0)
        dense = np.zeros((8, 8))
        for i, j, x in rows:
            dense[i, j] += x
            if mode == UNDIRECTED and i != j:
                dense[j, i] += x
        assert np.allclose(a.to_scipy().toarray(), dense)
    und = build_adjacency(g, UNDIRECTED)
    off = sum(x for i, j, x in rows if i != j)
    mat = und.to_scipy().toarray()
    assert np.isclose(mat.sum() - np.trace(mat), 2 * off)
