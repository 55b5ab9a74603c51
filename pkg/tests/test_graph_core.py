import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwkit.errors import DifferentStartVertex, InvalidPath, ValidationError
from mwkit.graph_core import (common_prefix_length, cycles_up_to, path_metric, paths_from,
                              paths_of_length, validate_graph)


def loops(n):
    return validate_graph(["v"], [(str(i), "v", "v") for i in range(1, n + 1)])


def test_two_loops_have_four_paths_of_length_two():
    assert len(paths_of_length(loops(2), 2)) == 4


def test_three_loops_have_27_paths_of_length_three():
    assert len(paths_of_length(loops(3), 3)) == 27


def test_paths_are_lexicographic():
    assert paths_of_length(loops(2), 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_sink_and_source_vertices_are_reported_together():
    with pytest.raises(ValidationError) as err:
        validate_graph(["u", "v", "w"], [("a", "u", "v"), ("b", "v", "v")])
    kinds = set(err.value.issues)
    assert ("SinkVertex", "w") in kinds
    assert ("SourceVertex", "w") in kinds
    assert ("SourceVertex", "u") in kinds


def test_dangling_and_duplicate_edges():
    with pytest.raises(ValidationError) as err:
        validate_graph(["v"], [("a", "v", "v"), ("a", "v", "v"), ("b", "v", "x")])
    assert {"DuplicateEdge", "DanglingEdgeEndpoint"} <= err.value.kinds()


def test_path_metric_at_half_with_prefix_three():
    g = loops(2)
    assert path_metric(g, (0, 0, 0, 1), (0, 0, 0, 0), 0.5) == pytest.approx(0.125)


def test_path_metric_rejects_different_start():
    g = validate_graph(["u", "v"], [("a", "u", "v"), ("b", "v", "u")])
    with pytest.raises(DifferentStartVertex):
        path_metric(g, (0,), (1,), 0.5)


def test_cycles_on_single_vertex():
    assert cycles_up_to(loops(2), 1) == [(0,), (1,)]


def test_cycles_on_two_cycle():
    g = validate_graph(["u", "v"], [("a", "u", "v"), ("b", "v", "u")])
    assert cycles_up_to(g, 1) == []
    assert set(cycles_up_to(g, 2)) == {(0, 1), (1, 0)}


def test_check_path_rejects_broken_chain():
    g = validate_graph(["u", "v"], [("a", "u", "v"), ("b", "v", "u")])
    with pytest.raises(InvalidPath):
        g.check_path((0, 0))
    assert g.check_path((0, 1, 0)) == (0, 1, 0)


def test_paths_from_vertex_partition_all_paths():
    g = validate_graph(["a", "b"], [("1", "a", "a"), ("2", "a", "b"), ("3", "b", "a"),
                                    ("4", "b", "b")])
    for k in (1, 2, 3):
        split = paths_from(g, "a", k) + paths_from(g, "b", k)
        assert sorted(split) == sorted(paths_of_length(g, k))


words = st.lists(st.integers(0, 2), min_size=1, max_size=12)


@given(words, words, words)
@settings(max_examples=200)
def test_path_metric_is_an_ultrametric(a, b, c):
    g = loops(3)
    d = lambda x, y: path_metric(g, x, y, 0.5)  # noqa: E731
    assert d(a, b) == d(b, a)
    assert d(a, c) <= max(d(a, b), d(b, c))


@given(words, words)
def test_common_prefix_is_symmetric_and_bounded(a, b):
    n = common_prefix_length(a, b)
    assert n == common_prefix_length(b, a)
    assert n <= min(len(a), len(b))
    assert list(a[:n]) == list(b[:n])


@given(st.integers(1, 4), st.integers(1, 4))
def test_path_count_matches_power(n, k):
    assert len(paths_of_length(loops(n), k)) == n ** k


def test_every_enumerated_path_chains():
    g = validate_graph(["a", "b"], [("1", "a", "a"), ("2", "a", "b"), ("3", "b", "a")])
    for k in range(1, 6):
        for p in paths_of_length(g, k):
            assert g.is_path(p)
        # count by brute force over all k-tuples
        brute = [p for p in itertools.product(range(3), repeat=k) if g.is_path(p)]
        assert len(brute) == len(paths_of_length(g, k))
