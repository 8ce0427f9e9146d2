# tests/test_graph_lemma.py
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from audit.graph_lemma import (
    LoopGraph, check_graph_lemma, exhaustive_sweep, lemma_bound, random_sweep, valid_parameters,
)
from core.errors import GraphPreconditionError


def test_lemma_bound_exact():
    assert lemma_bound(7, 1, Fraction(1, 2)) == 2
    assert lemma_bound(10, 2, Fraction(1, 4)) == Fraction(10) - (3 + Fraction(2, 3)) * 2


def test_loop_does_not_change_closed_neighbourhood():
    plain = LoopGraph.from_edges(3, [(0, 1)])
    looped = LoopGraph.from_edges(3, [(0, 0), (0, 1)])
    assert plain.closed_neighbourhood(0) == looped.closed_neighbourhood(0) == frozenset({0, 1})


def test_complete_graph_every_vertex_in_d():
    g = LoopGraph.complete(6)
    d, ok = check_graph_lemma(g, [0, 1, 2, 3], "1/2", n=7, t=1)
    assert d == frozenset(range(6))
    assert ok


def test_asymmetric_adjacency_rejected():
    adj = np.zeros((3, 3), dtype=bool)
    adj[0, 1] = True
    with pytest.raises(GraphPreconditionError, match="symmetrisk"):
        LoopGraph(adj)


@pytest.mark.parametrize("kwargs, match", [
    ({"n": 8, "t": 1}, r"\|V\|"),
    ({"n": 3, "t": 1}, "n > 3t"),
])
def test_size_and_threshold_preconditions(kwargs, match):
    with pytest.raises(GraphPreconditionError, match=match):
        check_graph_lemma(LoopGraph.complete(6), [0, 1, 2, 3], Fraction(1, 2), **kwargs)


@pytest.mark.parametrize("a", [Fraction(0), Fraction(1), Fraction(3, 2)])
def test_a_outside_open_interval_rejected(a):
    with pytest.raises(GraphPreconditionError, match="a="):
        check_graph_lemma(LoopGraph.complete(6), [0, 1, 2, 3], a, n=7, t=1)


def test_c_with_wrong_size_rejected():
    with pytest.raises(GraphPreconditionError, match="C må være 4"):
        check_graph_lemma(LoopGraph.complete(6), [0, 1, 2], Fraction(1, 2), n=7, t=1)


def test_c_vertex_with_small_neighbourhood_rejected():
    g = LoopGraph.from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    edges = np.array(g.adj)
    edges[3, :] = edges[:, 3] = False
    with pytest.raises(GraphPreconditionError, match="lukket naboskap"):
        check_graph_lemma(LoopGraph(edges), [0, 1, 2, 3], Fraction(1, 2), n=7, t=1)


def test_valid_parameters_small():
    assert list(valid_parameters(3)) == [(1, 0), (2, 0), (3, 0), (4, 1)]


def test_exhaustive_sweep_small_has_no_violation():
    report = exhaustive_sweep(max_vertices=4)
    assert report.ok
    assert report.graphs > 0 and report.cases > 0


@pytest.mark.slow
def test_exhaustive_sweep_full():
    report = exhaustive_sweep()
    assert report.ok, report.violations[:3]


def test_random_sweep_above_exhaustive_limit():
    report = random_sweep(10, 2, 200, np.random.default_rng(7))
    assert report.ok
    assert report.graphs == 200


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**21 - 1), st.sampled_from(["1/4", "1/2", "3/4"]))
def test_lemma_holds_on_six_vertices(code, a):
    # n=7, t=1: |V| = 6, |C| = 4
    slots = [(x, y) for x in range(6) for y in range(x, 6)]
    g = LoopGraph.from_edges(6, [s for i, s in enumerate(slots) if code >> i & 1])
    try:
        d, ok = check_graph_lemma(g, [0, 1, 2, 3], a, n=7, t=1)
    except GraphPreconditionError:
        return
    assert ok, sorted(d)
