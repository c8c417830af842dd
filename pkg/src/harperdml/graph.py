"""Graphs with a free, cocompact action of Z^d.

A vertex is a pair ``(group_part, domain_index)``; the infinite graph is never
enumerated, all operations walk it locally through edge templates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence, Union

GroupElement = tuple  # tuple[int, ...]

INFINITE = float("inf")


class GraphError(ValueError):
    pass


class FreenessViolation(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


@dataclass(frozen=True)
class Zd:
    """The free abelian group Z^d with its standard generating set."""

    dim: int

    def identity(self) -> GroupElement:
        return (0,) * self.dim

    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a: GroupElement) -> GroupElement:
        return tuple(-x for x in a)

    def word_length(self, a: GroupElement) -> int:
        return sum(abs(x) for x in a)

    def distance(self, a: GroupElement, b: GroupElement) -> int:
        return sum(abs(x - y) for x, y in zip(a, b))

    def generators(self) -> list[GroupElement]:
        gens = []
        for k in range(self.dim):
            e = [0] * self.dim
            e[k] = 1
            gens.append(tuple(e))
        return gens

    def neighbours(self, a: GroupElement) -> Iterator[GroupElement]:
        for k in range(self.dim):
            for step in (1, -1):
                b = list(a)
                b[k] += step
                yield tuple(b)


class VertexId(NamedTuple):
    group_part: GroupElement
    domain_index: int


class OrientedEdge(NamedTuple):
    """An oriented edge; ``forward`` is True for the template orientation."""

    origin: VertexId
    terminus: VertexId
    template_id: int
    forward: bool

    def reverse(self) -> "OrientedEdge":
        return OrientedEdge(self.terminus, self.origin, self.template_id, not self.forward)

    @property
    def base(self) -> GroupElement:
        """Group part of the template-orientation origin."""
        return self.origin.group_part if self.forward else self.terminus.group_part


class EdgeTemplate(NamedTuple):
    source: int
    offset: GroupElement
    target: int


@dataclass(frozen=True)
class GammaGraph:
    """Z^d-periodic graph: ``a`` vertex orbits and edge templates.

    Template ``(i, g, j)`` stands for every edge ``(h, i) -> (h + g, j)``.
    """

    a: int
    d: int
    templates: tuple
    kind: str = "templates"
    valences: tuple = field(init=False)
    connected: bool = field(init=False)

    def __post_init__(self):
        val = [0] * self.a
        for t in self.templates:
            val[t.source] += 1
            val[t.target] += 1
        object.__setattr__(self, "valences", tuple(val))
        object.__setattr__(self, "connected", _check_connected(self))

    @property
    def group(self) -> Zd:
        return Zd(self.d)

    @property
    def valence_bound(self) -> int:
        return max(self.valences)

    def valence(self, v: VertexId) -> int:
        return self.valences[v.domain_index]

    def base_vertex(self) -> VertexId:
        return VertexId(self.group.identity(), 0)

    def fundamental_domain(self) -> list[VertexId]:
        e = self.group.identity()
        return [VertexId(e, i) for i in range(self.a)]

    def edges_at(self, v: VertexId) -> list[OrientedEdge]:
        """Oriented edges with origin ``v``, in template order."""
        out = []
        g, i = v
        for tid, t in enumerate(self.templates):
            if t.source == i:
                out.append(OrientedEdge(v, VertexId(_add(g, t.offset), t.target), tid, True))
            if t.target == i:
                out.append(OrientedEdge(v, VertexId(_sub(g, t.offset), t.source), tid, False))
        return out

    def neighbours(self, v: VertexId) -> Iterator[VertexId]:
        for e in self.edges_at(v):
            yield e.terminus

    def template_edge(self, tid: int, base: GroupElement) -> OrientedEdge:
        t = self.templates[tid]
        return OrientedEdge(VertexId(base, t.source), VertexId(_add(base, t.offset), t.target), tid, True)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def build_cayley_zd(d: int) -> GammaGraph:
    if d < 1:
        raise GraphError(f"dimension must be positive, got {d}")
    temps = tuple(EdgeTemplate(0, gen, 0) for gen in Zd(d).generators())
    return GammaGraph(1, d, temps, kind="zd")


def build_from_templates(a: int, d: int, templates: Sequence) -> GammaGraph:
    if a < 1 or d < 1:
        raise GraphError("a and d must be positive")
    seen = set()
    clean = []
    for raw in templates:
        i, off, j = raw
        off = tuple(int(x) for x in off)
        if len(off) != d:
            raise GraphError(f"offset {off} does not have length {d}")
        if not (0 <= i < a and 0 <= j < a):
            raise GraphError(f"template {raw} references a domain index outside [0, {a})")
        if i == j and not any(off):
            raise FreenessViolation(f"template {raw} is a loop at a vertex")
        key = (i, off, j)
        rkey = (j, tuple(-x for x in off), i)
        if key in seen or rkey in seen:
            raise DuplicateEdge(f"template {raw} duplicates an existing edge")
        seen.add(key)
        clean.append(EdgeTemplate(int(i), off, int(j)))
    return GammaGraph(a, d, tuple(clean))


def act(g: GammaGraph, gamma: GroupElement, x: Union[VertexId, OrientedEdge]):
    """Left translation by ``gamma`` of a vertex or an oriented edge."""
    if isinstance(x, OrientedEdge):
        return OrientedEdge(act(g, gamma, x.origin), act(g, gamma, x.terminus), x.template_id, x.forward)
    return VertexId(_add(gamma, x.group_part), x.domain_index)


def simplicial_distance(g: GammaGraph, v1: VertexId, v2: VertexId, cutoff: int):
    """Edge-path distance, or ``INFINITE`` when it exceeds ``cutoff``."""
    if v1 == v2:
        return 0
    seen = {v1}
    frontier = [v1]
    for r in range(1, cutoff + 1):
        nxt = []
        for u in frontier:
            for w in g.neighbours(u):
                if w == v2:
                    return r
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return INFINITE


def ball(g: GammaGraph, v: VertexId, r: int) -> dict:
    """Vertices within distance ``r`` of ``v``, mapped to their distance."""
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if dist[u] == r:
            continue
        for w in g.neighbours(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _check_connected(g: GammaGraph) -> bool:
    # quotient connectivity + the cycle offsets must generate all of Z^d
    pot = {0: (0,) * g.d}
    queue = deque([0])
    adj = {i: [] for i in range(g.a)}
    for t in g.templates:
        adj[t.source].append((t.target, t.offset))
        adj[t.target].append((t.source, tuple(-x for x in t.offset)))
    while queue:
        i = queue.popleft()
        for j, off in adj[i]:
            if j not in pot:
                pot[j] = _add(pot[i], off)
                queue.append(j)
    if len(pot) < g.a:
        return False
    cycles = []
    for t in g.templates:
        c = _sub(_add(pot[t.source], t.offset), pot[t.target])
        if any(c):
            cycles.append(list(c))
    return _lattice_is_full(cycles, g.d)


def _lattice_is_full(vectors: list, d: int) -> bool:
    """True iff the integer vectors generate Z^d (row-style Hermite reduction)."""
    rows = [list(v) for v in vectors]
    for col in range(d):
        piv = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(piv) > 1:
            piv.sort(key=lambda r: abs(r[col]))
            p = piv[0]
            new = [p]
            for r in piv[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                (new if r2[col] != 0 else rest).append(r2)
            piv = new
        if not piv or abs(piv[0][col]) != 1:
            return False
        rows = rest
    return True

