"""Folner exhaustions of Z^d, induced finite subgraphs and their boundaries."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import GammaGraph, VertexId, Zd


@dataclass(frozen=True)
class FolnerSequence:
    sets: tuple  # tuple of frozensets of group elements
    description: str = "explicit"
    labels: tuple = ()

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, k):
        return self.sets[k]

    def label(self, k: int):
        return self.labels[k] if self.labels else k

    def is_nested(self) -> bool:
        return all(a <= b for a, b in zip(self.sets, self.sets[1:]))


def _box(lo: int, hi: int, d: int) -> frozenset:
    return frozenset(itertools.product(range(lo, hi + 1), repeat=d))


def boxes_zd(d: int, radii: Sequence[int]) -> FolnerSequence:
    """Lambda_m = [-m, m]^d for each radius m."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    return FolnerSequence(tuple(_box(-m, m, d) for m in radii), f"boxes_zd(d={d})", tuple(radii))


def corner_boxes_zd(d: int, sides: Sequence[int]) -> FolnerSequence:
    """Lambda_L = [0, L-1]^d for each side length L (allows even sides)."""
    sides = list(sides)
    if not sides or any(b <= a for a, b in zip(sides, sides[1:])) or sides[0] < 1:
        raise ValueError("sides must be positive and strictly increasing")
    return FolnerSequence(tuple(_box(0, L - 1, d) for L in sides), f"corner_boxes_zd(d={d})", tuple(sides))


def explicit_sequence(sets: Iterable[Iterable]) -> FolnerSequence:
    return FolnerSequence(tuple(frozenset(tuple(x) for x in s) for s in sets))


def group_delta_boundary(seq: FolnerSequence, k: int, delta: int, strict: bool = True) -> set:
    """{gamma : d(gamma, Lambda) < delta and d(gamma, complement) < delta}.

    ``strict=False`` uses <= delta on both sides instead.
    """
    lam = seq[k]
    if not lam:
        return set()
    d = len(next(iter(lam)))
    reach = delta - 1 if strict else delta
    if reach < 1:
        return set()
    grp = Zd(d)
    # elements within `reach` of Lambda (outside) and of the complement (inside)
    outer = _bfs_layers(lam, reach, grp, inside=False)
    inner = _bfs_layers(lam, reach, grp, inside=True)
    return outer | inner


def _bfs_layers(lam: frozenset, reach: int, grp: Zd, inside: bool) -> set:
    # seeds: the first layer on the requested side, adjacent to the other side
    seeds = set()
    for x in lam:
        for y in grp.neighbours(x):
            if y not in lam:
                seeds.add(x if inside else y)
    found = set(seeds)
    frontier = list(seeds)
    for _ in range(reach - 1):
        nxt = []
        for x in frontier:
            for y in grp.neighbours(x):
                if (y in lam) == inside and y not in found:
                    found.add(y)
                    nxt.append(y)
        frontier = nxt
    return found


@dataclass
class FiniteRestriction:
    """Finite subgraph X_m over a set of group elements."""

    g: GammaGraph
    lam: frozenset
    vertices: list
    index: dict
    internal_edges: list  # template-oriented edges with both ends inside
    _boundary_cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return len(self.lam)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v: VertexId) -> bool:
        return v in self.index

    def internal_valence(self, v: VertexId) -> int:
        return sum(1 for w in self.g.neighbours(v) if w in self.index)


def induce_subgraph(g: GammaGraph, lam: Iterable) -> FiniteRestriction:
    lam = frozenset(tuple(x) for x in lam)
    if not lam:
        raise ValueError("Lambda must be nonempty")
    verts = sorted(VertexId(x, i) for x in lam for i in range(g.a))
    index = {v: k for k, v in enumerate(verts)}
    edges = []
    for v in verts:
        for e in g.edges_at(v):
            if e.forward and e.terminus in index:
                edges.append(e)
    return FiniteRestriction(g, lam, verts, index, edges)


def graph_delta_boundary(g: GammaGraph, X: FiniteRestriction, delta: int) -> tuple:
    """(inner, outer) vertices within distance <= delta of both X and its complement."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if delta in X._boundary_cache:
        return X._boundary_cache[delta]
    inner_seed, outer_seed = set(), set()
    for v in X.vertices:
        for w in g.neighbours(v):
            if w not in X.index:
                inner_seed.add(v)
                outer_seed.add(w)
    inner = _grow(g, inner_seed, delta - 1, lambda u: u in X.index)
    outer = _grow(g, outer_seed, delta - 1, lambda u: u not in X.index)
    X._boundary_cache[delta] = (inner, outer)
    return inner, outer


def _grow(g, seeds, steps, keep) -> set:
    found = set(seeds)
    queue = deque((s, 0) for s in seeds)
    while queue:
        u, r = queue.popleft()
        if r == steps:
            continue
        for w in g.neighbours(u):
            if keep(w) and w not in found:
                found.add(w)
                queue.append((w, r + 1))
    return found


@dataclass
class RegularityReport:
    labels: list
    deltas: list
    ratios: dict  # (label, delta) -> ratio
    monotone: dict  # delta -> bool
    regular: bool

    def rows(self):
        for lab in self.labels:
            yield lab, [self.ratios[(lab, d)] for d in self.deltas]


def regularity_report(g: GammaGraph, seq: FolnerSequence, deltas: Sequence[int]) -> RegularityReport:
    """Boundary fractions #V(boundary_delta X_m) / #V(X_m), inner plus outer."""
    if len(seq) == 0:
        raise ValueError("empty sequence")
    ratios = {}
    labels = [seq.label(k) for k in range(len(seq))]
    for k, lab in enumerate(labels):
        X = induce_subgraph(g, seq[k])
        for d in deltas:
            inner, outer = graph_delta_boundary(g, X, d)
            ratios[(lab, d)] = (len(inner) + len(outer)) / len(X)
    monotone = {}
    for d in deltas:
        col = [ratios[(lab, d)] for lab in labels]
        monotone[d] = all(b <= a for a, b in zip(col, col[1:]))
    last = [ratios[(labels[-1], d)] for d in deltas]
    regular = all(monotone.values()) and len(labels) > 1 and all(
        ratios[(labels[-1], d)] < ratios[(labels[0], d)] for d in deltas
    ) and max(last) < 1
    return RegularityReport(labels, list(deltas), ratios, monotone, regular)


def boundary_ratio(g: GammaGraph, X: FiniteRestriction, delta: int = 1) -> float:
    inner, outer = graph_delta_boundary(g, X, delta)
    return (len(inner) + len(outer)) / len(X)


