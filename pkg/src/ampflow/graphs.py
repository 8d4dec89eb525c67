"""Directed and partially directed graphs, d-separation, and DOT round-tripping.

Vertex order is fixed at construction and drives every deterministic
iteration downstream (PC scan order, DOT byte output, test reproducibility).
All graph types are immutable and safe to share across threads.
"""

from __future__ import annotations

import re
from itertools import combinations
from typing import Iterable

from .errors import CyclicGraph, UnknownVertex

_DOT_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_name(label: str) -> str:
    return label if _DOT_BARE.match(label) else '"%s"' % label.replace('"', '\\"')


def _check_vertices(vertices: Iterable[str]) -> tuple[str, ...]:
    vs = tuple(str(v) for v in vertices)
    if len(set(vs)) != len(vs):
        raise ValueError("vertex labels must be unique")
    return vs


class DirectedGraph:
    """Immutable directed graph over labeled vertices.

    Cycles are representable; operations that require acyclicity
    (``topological_order``, ``d_separated``) raise ``CyclicGraph``.
    """

    __slots__ = ("_vertices", "_index", "_edges", "_parents", "_children")

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        self._vertices = _check_vertices(vertices)
        self._index = {v: i for i, v in enumerate(self._vertices)}
        edge_set = set()
        parents: dict[str, set[str]] = {v: set() for v in self._vertices}
        children: dict[str, set[str]] = {v: set() for v in self._vertices}
        for x, y in edges:
            if x not in self._index or y not in self._index:
                raise UnknownVertex(f"edge ({x}, {y}) references an unknown vertex")
            if x == y:
                raise ValueError(f"self-loop on {x!r} not allowed")
            edge_set.add((x, y))
            parents[y].add(x)
            children[x].add(y)
        self._edges = frozenset(edge_set)
        key = self._index.__getitem__
        self._parents = {v: tuple(sorted(parents[v], key=key)) for v in self._vertices}
        self._children = {v: tuple(sorted(children[v], key=key)) for v in self._vertices}

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return self._edges

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def has_edge(self, x: str, y: str) -> bool:
        return (x, y) in self._edges

    def adjacent(self, x: str, y: str) -> bool:
        return (x, y) in self._edges or (y, x) in self._edges

    def parents(self, v: str) -> tuple[str, ...]:
        self.index(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self.index(v)
        return self._children[v]

    def sorted_edges(self) -> list[tuple[str, str]]:
        key = self._index.__getitem__
        return sorted(self._edges, key=lambda e: (key(e[0]), key(e[1])))

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm; raises ``CyclicGraph`` on a cycle."""
        indeg = {v: len(self._parents[v]) for v in self._vertices}
        ready = [v for v in self._vertices if indeg[v] == 0]
        order: list[str] = []
        while ready:
            # pop the smallest-index vertex for a deterministic order
            ready.sort(key=self._index.__getitem__)
            v = ready.pop(0)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self._vertices):
            raise CyclicGraph("graph contains a directed cycle")
        return tuple(order)

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
            return True
        except CyclicGraph:
            return False

    def ancestors(self, seeds: Iterable[str]) -> set[str]:
        """Vertices with a directed path into any seed, seeds included."""
        out = set()
        stack = [self._require(v) for v in seeds]
        while stack:
            v = stack.pop()
            if v in out:
                continue
            out.add(v)
            stack.extend(self._parents[v])
        return out

    def descendants(self, v: str) -> set[str]:
        """Vertices reachable from ``v`` by a directed path, ``v`` included."""
        out = set()
        stack = [self._require(v)]
        while stack:
            u = stack.pop()
            if u in out:
                continue
            out.add(u)
            stack.extend(self._children[u])
        return out

    def _require(self, v: str) -> str:
        self.index(v)
        return v

    def to_dot(self) -> str:
        lines = ["digraph {"]
        lines += [f"  {_dot_name(v)};" for v in self._vertices]
        lines += [f"  {_dot_name(x)} -> {_dot_name(y)};" for x, y in self.sorted_edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        return f"DirectedGraph(vertices={list(self._vertices)!r}, edges={self.sorted_edges()!r})"


class MixedGraph:
    """Immutable partially directed graph: directed plus undirected edges.

    At most one mark may exist per unordered vertex pair, so the directed
    and undirected edge sets are disjoint and 2-cycles are unrepresentable.
    """

    __slots__ = ("_vertices", "_index", "_directed", "_undirected")

    def __init__(
        self,
        vertices: Iterable[str],
        directed_edges: Iterable[tuple[str, str]] = (),
        undirected_edges: Iterable[Iterable[str]] = (),
    ):
        self._vertices = _check_vertices(vertices)
        self._index = {v: i for i, v in enumerate(self._vertices)}
        directed = set()
        for x, y in directed_edges:
            self._require(x), self._require(y)
            if x == y:
                raise ValueError(f"self-loop on {x!r} not allowed")
            directed.add((x, y))
        undirected = set()
        for pair in undirected_edges:
            x, y = tuple(pair)
            self._require(x), self._require(y)
            if x == y:
                raise ValueError(f"self-loop on {x!r} not allowed")
            undirected.add(frozenset((x, y)))
        marks: set[frozenset[str]] = set()
        for x, y in directed:
            pair = frozenset((x, y))
            if pair in marks or pair in undirected:
                raise ValueError(f"conflicting marks on pair {set(pair)!r}")
            marks.add(pair)
        self._directed = frozenset(directed)
        self._undirected = frozenset(undirected)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def directed_edges(self) -> frozenset[tuple[str, str]]:
        return self._directed

    @property
    def undirected_edges(self) -> frozenset[frozenset[str]]:
        return self._undirected

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def _require(self, v: str) -> str:
        self.index(v)
        return v

    def adjacent(self, x: str, y: str) -> bool:
        return (
            (x, y) in self._directed
            or (y, x) in self._directed
            or frozenset((x, y)) in self._undirected
        )

    def neighbors(self, v: str) -> tuple[str, ...]:
        self._require(v)
        out = {y for x, y in self._directed if x == v}
        out |= {x for x, y in self._directed if y == v}
        for pair in self._undirected:
            if v in pair:
                out |= pair - {v}
        return tuple(sorted(out, key=self._index.__getitem__))

    def parents(self, v: str) -> tuple[str, ...]:
        self._require(v)
        ps = {x for x, y in self._directed if y == v}
        return tuple(sorted(ps, key=self._index.__getitem__))

    def skeleton_pairs(self) -> frozenset[frozenset[str]]:
        pairs = {frozenset(e) for e in self._directed}
        return frozenset(pairs | self._undirected)

    def sorted_directed(self) -> list[tuple[str, str]]:
        key = self._index.__getitem__
        return sorted(self._directed, key=lambda e: (key(e[0]), key(e[1])))

    def sorted_undirected(self) -> list[tuple[str, str]]:
        key = self._index.__getitem__
        pairs = [tuple(sorted(p, key=key)) for p in self._undirected]
        return sorted(pairs, key=lambda e: (key(e[0]), key(e[1])))

    def to_dot(self) -> str:
        lines = ["digraph {"]
        lines += [f"  {_dot_name(v)};" for v in self._vertices]
        lines += [f"  {_dot_name(x)} -> {_dot_name(y)};" for x, y in self.sorted_directed()]
        lines += [
            f"  {_dot_name(x)} -> {_dot_name(y)} [dir=none];"
            for x, y in self.sorted_undirected()
        ]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            self._vertices == other._vertices
            and self._directed == other._directed
            and self._undirected == other._undirected
        )

    def __hash__(self) -> int:
        return hash((self._vertices, self._directed, self._undirected))

    def __repr__(self) -> str:
        return (
            f"MixedGraph(vertices={list(self._vertices)!r}, "
            f"directed={self.sorted_directed()!r}, undirected={self.sorted_undirected()!r})"
        )


class SepSetMap:
    """Separating sets keyed by unordered vertex pair, insertion-ordered.

    Each pair may be recorded once, and its set may not contain either
    endpoint.
    """

    __slots__ = ("_sets",)

    def __init__(self):
        self._sets: dict[frozenset[str], tuple[str, ...]] = {}

    def set(self, x: str, y: str, z: Iterable[str]) -> None:
        pair = frozenset((x, y))
        if len(pair) != 2:
            raise ValueError("a pair needs two distinct vertices")
        if pair in self._sets:
            raise ValueError(f"pair {set(pair)!r} already has a separating set")
        zt = tuple(z)
        if x in zt or y in zt:
            raise ValueError("separating set must not contain the pair itself")
        self._sets[pair] = zt

    def get(self, x: str, y: str) -> tuple[str, ...] | None:
        return self._sets.get(frozenset((x, y)))

    def __contains__(self, pair: Iterable[str]) -> bool:
        return frozenset(pair) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def items(self):
        return self._sets.items()

    def as_dict(self) -> dict[str, list[str]]:
        """JSON view with 'x,y' keys (labels are assumed comma-free)."""
        return {",".join(sorted(pair)): list(z) for pair, z in self._sets.items()}


def skeleton(g: DirectedGraph) -> MixedGraph:
    """Drop every edge orientation; antiparallel pairs collapse to one edge."""
    pairs = {frozenset(e) for e in g.edges}
    return MixedGraph(g.vertices, undirected_edges=pairs)


def d_separated(g: DirectedGraph, x: str, z: Iterable[str], y: str) -> bool:
    """Exact d-separation test on a DAG.

    Implemented by ancestor closure + moralization reachability, which is
    equivalent to the blocked-path definition: ``x`` and ``y`` are separated
    by ``z`` iff they are disconnected in the moral graph of the subgraph
    induced by the ancestors of ``{x, y} | z`` once ``z`` is removed.
    """
    zset = frozenset(z)
    for v in (x, y, *zset):
        g.index(v)
    if x == y:
        raise ValueError("x and y must differ")
    if x in zset or y in zset:
        raise ValueError("x and y must not be members of the conditioning set")
    g.topological_order()  # CyclicGraph if not a DAG

    anc = g.ancestors({x, y} | zset)
    adj: dict[str, set[str]] = {v: set() for v in anc}
    for u, v in g.edges:
        if u in anc and v in anc:
            adj[u].add(v)
            adj[v].add(u)
    for v in anc:
        for p, q in combinations(g.parents(v), 2):
            # ancestor sets are closed under parents, so p, q are in anc
            adj[p].add(q)
            adj[q].add(p)

    seen = {x}
    stack = [x]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w == y:
                return False
            if w not in seen and w not in zset:
                seen.add(w)
                stack.append(w)
    return True


def v_structures(g: DirectedGraph | MixedGraph) -> frozenset[tuple[str, str, str]]:
    """Colliders a -> c <- b with nonadjacent parents, as (a, c, b), a before b."""
    out = set()
    for c in g.vertices:
        for a, b in combinations(g.parents(c), 2):
            if not g.adjacent(a, b):
                out.add((a, c, b))
    return frozenset(out)


def marginalize(g: DirectedGraph, hidden: Iterable[str]) -> DirectedGraph:
    """Latent projection onto the vertices not in ``hidden``.

    The result has an edge u -> v iff the original graph has a directed
    path from u to v whose intermediate vertices all lie in ``hidden``.
    Noise bookkeeping is out of scope here; this is purely graphical.
    """
    hide = {g._require(v) for v in hidden}
    kept = [v for v in g.vertices if v not in hide]
    edges = set()
    for u in kept:
        seen: set[str] = set()
        stack = list(g.children(u))
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            if w in hide:
                stack.extend(g.children(w))
            elif w != u:
                edges.add((u, w))
    return DirectedGraph(kept, edges)


_DOT_EDGE = re.compile(
    r'^\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*->\s*'
    r'("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*(\[dir=none\])?\s*;\s*$'
)
_DOT_VERTEX = re.compile(r'^\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*;\s*$')


def _unquote(tok: str) -> str:
    if tok.startswith('"'):
        return tok[1:-1].replace('\\"', '"')
    return tok


def from_dot(text: str) -> MixedGraph:
    """Parse the DOT subset emitted by ``to_dot`` (vertex and edge lines only)."""
    vertices: list[str] = []
    directed: list[tuple[str, str]] = []
    undirected: list[tuple[str, str]] = []

    def note(v: str) -> None:
        if v not in vertices:
            vertices.append(v)

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("digraph", "graph", "}", "//", "#")):
            continue
        m = _DOT_EDGE.match(line)
        if m:
            x, y = _unquote(m.group(1)), _unquote(m.group(2))
            note(x), note(y)
            (undirected if m.group(3) else directed).append((x, y))
            continue
        m = _DOT_VERTEX.match(line)
        if m:
            note(_unquote(m.group(1)))
            continue
        raise ValueError(f"unsupported DOT line: {raw!r}")
    return MixedGraph(vertices, directed, undirected)


def directed_from_dot(text: str) -> DirectedGraph:
    """Parse a DOT file that contains only directed edges."""
    g = from_dot(text)
    if g.undirected_edges:
        raise ValueError("reference graph must not contain undirected edges")
    return DirectedGraph(g.vertices, g.directed_edges)
