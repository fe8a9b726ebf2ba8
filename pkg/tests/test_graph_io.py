import math
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from streamspanner.core import Edge, build_sampling_hierarchy
from streamspanner.graph_io import (
    EdgeStream,
    GraphFormatError,
    format_edge_list,
    gen_complete,
    gen_gnp,
    gen_grid,
    parse_edge_list,
    read_edge_stream,
    sort_by_weight,
    write_edge_list,
)
from streamspanner.incremental import build_from_sorted_weighted_stream
from streamspanner.verifier import check_stretch


def test_read_unweighted(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("3 3 unweighted\n1 2\n2 3\n1 3\n")
    stream = read_edge_stream(path)
    assert stream.n == 3 and not stream.weighted
    assert list(stream) == [Edge(1, 2, 1), Edge(2, 3, 1), Edge(1, 3, 1)]
    assert list(stream) == list(stream)  # replayable


def test_self_loop_dropped_with_count():
    stream = parse_edge_list("3 2 weighted\n1 1 5\n1 2 4\n")
    assert list(stream) == [Edge(1, 2, 4)]
    assert stream.self_loops == 1


@pytest.mark.parametrize("text,line", [
    ("3 1 unweighted\n1 x\n", 2),
    ("3 2 unweighted\n1 2\n1 4\n", 3),
    ("3 1 weighted\n1 2\n", 2),
    ("3 unweighted\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphFormatError) as err:
        parse_edge_list(text)
    assert err.value.line == line


def test_edge_count_mismatch():
    with pytest.raises(GraphFormatError):
        parse_edge_list("3 2 unweighted\n1 2\n")


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_round_trip(tmp_path_factory, data):
    n = data.draw(st.integers(2, 30))
    weighted = data.draw(st.booleans())
    weight = st.one_of(st.integers(0, 10**6), st.floats(0, 1e6, allow_nan=False)) if weighted else st.just(1)
    edges = data.draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n), weight)
                               .filter(lambda e: e[0] != e[1]), max_size=40))
    path = tmp_path_factory.mktemp("rt") / "g.txt"
    write_edge_list(path, n, edges, weighted)
    back = read_edge_stream(path)
    assert back.n == n and back.weighted == weighted
    assert [tuple(e) for e in back] == [tuple(e) for e in edges]
    assert format_edge_list(n, back, weighted) == path.read_text()


def test_gnp_extremes():
    assert list(gen_gnp(30, 0.0, 1)) == []
    assert len(gen_gnp(4, 1.0, 1).edges()) == 6


def test_gnp_edge_count_is_binomial():
    pairs = 100 * 99 // 2
    counts = [len(gen_gnp(100, 0.3, s).edges()) for s in range(50)]
    se = math.sqrt(pairs * 0.3 * 0.7 / 50)
    assert abs(statistics.mean(counts) - 0.3 * pairs) <= 3 * se


def test_generators_deterministic_and_simple():
    a, b = gen_gnp(50, 0.2, 3, (1, 9)), gen_gnp(50, 0.2, 3, (1, 9))
    assert a.edges() == b.edges()
    assert a.edges() != gen_gnp(50, 0.2, 4, (1, 9)).edges()
    keys = [e.key() for e in a]
    assert len(keys) == len(set(keys))
    assert all(1 <= e.w <= 9 for e in a)


def test_complete_and_grid_sizes():
    assert len(gen_complete(20, 1, (1, 100)).edges()) == 190
    grid = gen_grid(3, 4)
    assert grid.n == 12 and len(grid.edges()) == 3 * 3 + 2 * 4


def test_sort_by_weight():
    s = EdgeStream(4, True, [Edge(1, 2, 3), Edge(2, 3, 1), Edge(3, 4, 2)])
    assert [e.w for e in sort_by_weight(s)] == [1, 2, 3]
    same = EdgeStream(4, True, [Edge(1, 2, 5), Edge(3, 4, 5), Edge(2, 3, 5)])
    assert sort_by_weight(same).edges() == same.edges()


def test_sort_then_single_pass_is_weighted_spanner():
    for seed in range(5):
        g = gen_gnp(60, 0.2, seed, (1, 100))
        h = build_sampling_hierarchy(60, 3, seed)
        spanner = build_from_sorted_weighted_stream(h, sort_by_weight(g))
        assert check_stretch(60, g, spanner, 5).ok
