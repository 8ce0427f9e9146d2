# src/audit/graph_lemma.py
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

import numpy as np

from core.errors import GraphPreconditionError

log = logging.getLogger(__name__)

DEFAULT_A_VALUES = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
EXHAUSTIVE_MAX_VERTICES = 6
CHUNK = 1 << 15


class LoopGraph:
    """
    Enkel graf med løkker og uten multikanter, lagret som symmetrisk bool-matrise.
    Den lukkede naboskapen til v er naboene pluss v selv, så en løkke endrer den ikke.
    """

    def __init__(self, adjacency: np.ndarray):
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphPreconditionError(f"Nabomatrisen må være kvadratisk, fikk {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise GraphPreconditionError("Nabomatrisen må være symmetrisk")
        self.adj = adj

    @classmethod
    def complete(cls, size: int, loops: bool = True) -> "LoopGraph":
        adj = np.ones((size, size), dtype=bool)
        if not loops:
            np.fill_diagonal(adj, False)
        return cls(adj)

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[tuple[int, int]]) -> "LoopGraph":
        adj = np.zeros((size, size), dtype=bool)
        for x, y in edges:
            adj[x, y] = adj[y, x] = True
        return cls(adj)

    @property
    def size(self) -> int:
        return self.adj.shape[0]

    def closed(self) -> np.ndarray:
        return self.adj | np.eye(self.size, dtype=bool)

    def closed_neighbourhood(self, v: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.closed()[v]).tolist())


def lemma_bound(n: int, t: int, a: Fraction) -> Fraction:
    """n - (3 + 2a/(1-a)) t, eksakt."""
    return n - (3 + 2 * a / (1 - a)) * t


def _check_preconditions(size: int, c: frozenset[int], a: Fraction, n: int, t: int) -> None:
    if not (n > 3 * t >= 0):
        raise GraphPreconditionError(f"Krever n > 3t >= 0, fikk n={n} t={t}")
    if size != n - t:
        raise GraphPreconditionError(f"|V|={size} men n-t={n - t}")
    if not 0 < a < 1:
        raise GraphPreconditionError(f"a={a} ligger ikke i (0, 1)")
    if len(c) != n - 3 * t or any(not 0 <= v < size for v in c):
        raise GraphPreconditionError(f"C må være {n - 3 * t} hjørner i V, fikk {sorted(c)}")


def check_graph_lemma(g: LoopGraph, c: Iterable[int], a: Fraction | str, n: int, t: int) -> tuple[frozenset[int], bool]:
    """
    D = hjørner med minst a(n-3t) naboer i C (v selv teller hvis v ∈ C).
    Returnerer (D, |D| >= n - (3 + 2a/(1-a)) t). Brutte forutsetninger gir
    GraphPreconditionError, som skilles fra et brudd på grensen.
    """
    a = Fraction(a)
    cset = frozenset(int(v) for v in c)
    _check_preconditions(g.size, cset, a, n, t)
    closed = g.closed()
    need = n - 3 * t
    small = [v for v in cset if int(closed[v].sum()) < need]
    if small:
        raise GraphPreconditionError(f"Hjørner i C med lukket naboskap < {need}: {sorted(small)}")
    mask = np.zeros(g.size, dtype=bool)
    mask[list(cset)] = True
    counts = (closed & mask).sum(axis=1)
    # counts >= a*need, eksakt med heltall
    d = frozenset(np.flatnonzero(counts * a.denominator >= a.numerator * need).tolist())
    return d, len(d) >= lemma_bound(n, t, a)


# ---------------------- Uttømmende søk ----------------------

@dataclass
class LemmaSweepReport:
    graphs: int = 0
    cases: int = 0
    skipped: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def valid_parameters(max_vertices: int = EXHAUSTIVE_MAX_VERTICES) -> Iterator[tuple[int, int]]:
    """Alle (n, t) med n > 3t >= 0 og 1 <= n-t <= max_vertices."""
    for t in range(0, max_vertices):
        for n in range(3 * t + 1, max_vertices + t + 1):
            if n - t >= 1:
                yield n, t


def _edge_slots(size: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(size) for y in range(x, size)]


def _adjacency_batch(codes: np.ndarray, size: int, slots: list[tuple[int, int]]) -> np.ndarray:
    bits = ((codes[:, None] >> np.arange(len(slots), dtype=np.int64)) & 1).astype(bool)
    adj = np.zeros((len(codes), size, size), dtype=bool)
    xs = np.array([x for x, _ in slots])
    ys = np.array([y for _, y in slots])
    adj[:, xs, ys] = bits
    adj[:, ys, xs] = bits
    return adj


def exhaustive_sweep(
    max_vertices: int = EXHAUSTIVE_MAX_VERTICES,
    a_values: Iterable[Fraction] = DEFAULT_A_VALUES,
    params: Optional[Iterable[tuple[int, int]]] = None,
) -> LemmaSweepReport:
    """
    Alle løkkegrafer på |V| = n-t <= max_vertices hjørner, alle gyldige C og alle a.
    Kantmengder kodes som heltall og behandles i numpy-blokker.
    """
    a_values = [Fraction(a) for a in a_values]
    report = LemmaSweepReport()
    for n, t in (params if params is not None else valid_parameters(max_vertices)):
        size = n - t
        need = n - 3 * t
        slots = _edge_slots(size)
        total = 1 << len(slots)
        subsets = [np.isin(np.arange(size), c) for c in itertools.combinations(range(size), need)]
        log.info("Graf-lemma | n=%d t=%d |V|=%d grafer=%d C-valg=%d", n, t, size, total, len(subsets))
        for start in range(0, total, CHUNK):
            codes = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            closed = _adjacency_batch(codes, size, slots) | np.eye(size, dtype=bool)
            degree = closed.sum(axis=2)
            report.graphs += len(codes)
            for mask in subsets:
                valid = (degree[:, mask] >= need).all(axis=1)
                report.skipped += int((~valid).sum())
                if not valid.any():
                    continue
                counts = (closed[valid] & mask).sum(axis=2)
                for a in a_values:
                    report.cases += int(valid.sum())
                    d_size = (counts * a.denominator >= a.numerator * need).sum(axis=1)
                    bound = lemma_bound(n, t, a)
                    bad = d_size * bound.denominator < bound.numerator
                    if bad.any():
                        for code in codes[valid][bad][:5]:
                            report.violations.append({"n": n, "t": t, "a": str(a), "code": int(code),
                                                      "C": np.flatnonzero(mask).tolist()})
    if report.violations:
        log.error("Graf-lemma brutt | violations=%d", len(report.violations))
    else:
        log.info("Graf-lemma OK | graphs=%d cases=%d skipped=%d", report.graphs, report.cases, report.skipped)
    return report


def random_sweep(n: int, t: int, samples: int, rng: np.random.Generator,
                 a_values: Iterable[Fraction] = DEFAULT_A_VALUES) -> LemmaSweepReport:
    """Tilfeldige grafer for |V| over grensen for uttømmende søk."""
    size = n - t
    need = n - 3 * t
    report = LemmaSweepReport()
    for _ in range(samples):
        upper = rng.random((size, size)) < rng.uniform(0.3, 1.0)
        adj = np.triu(upper) | np.triu(upper).T
        g = LoopGraph(adj)
        c = rng.choice(size, size=need, replace=False)
        report.graphs += 1
        for a in a_values:
            try:
                d, ok = check_graph_lemma(g, c.tolist(), a, n, t)
            except GraphPreconditionError:
                report.skipped += 1
                continue
            report.cases += 1
            if not ok:
                report.violations.append({"n": n, "t": t, "a": str(a), "C": sorted(c.tolist()), "D": sorted(d)})
    return report
