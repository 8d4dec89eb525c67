"""Constraint-based reconstruction of the influence graph.

Three phases over an abstract separation oracle: skeleton search with
growing conditioning sets, v-structure orientation from the recorded
separating sets, then propagation of the two orientation rules (oriented
edges whose tails have a unique parent, and edges closing a directed
path). Scan order is fixed by vertex construction order so identical
inputs yield identical results, query log included.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Protocol

from .graphs import DirectedGraph, MixedGraph, SepSetMap, d_separated
from .model import TimeSeriesSet
from .spectral import SpectralMatrix, WelchParams, WsepConfig, welch_cross_psd, wsep


class SeparationOracle(Protocol):
    def sep(self, x: str, z: tuple[str, ...], y: str) -> tuple[bool, float | None]:
        """Return (separated, statistic); statistic is None for exact oracles."""


class DsepOracle:
    """Exact d-separation oracle over a known DAG (test mode)."""

    def __init__(self, graph: DirectedGraph):
        self.graph = graph

    def sep(self, x: str, z: tuple[str, ...], y: str) -> tuple[bool, float | None]:
        return d_separated(self.graph, x, z, y), None


class WsepOracle:
    """Wiener-separation oracle over a cross-PSD matrix (data mode)."""

    def __init__(self, phi: SpectralMatrix, cfg: WsepConfig = WsepConfig()):
        self.phi = phi
        self.cfg = cfg

    def sep(self, x: str, z: tuple[str, ...], y: str) -> tuple[bool, float | None]:
        result = wsep(self.phi, x, y, z, self.cfg)
        return result.separated, result.statistic


@dataclass(frozen=True)
class QueryRecord:
    x: str
    y: str
    z: tuple[str, ...]
    statistic: float | None
    separated: bool


@dataclass(frozen=True)
class PcConfig:
    """Search settings; ``max_cond`` defaults to n - 2 at runtime."""

    max_cond: int | None = None
    wsep: WsepConfig = field(default_factory=WsepConfig)
    welch: WelchParams = field(default_factory=WelchParams)
    meek: bool = False

    def __post_init__(self):
        if self.max_cond is not None and self.max_cond < 0:
            raise ValueError("max_cond must be nonnegative")


@dataclass(frozen=True)
class ReconstructionResult:
    graph: MixedGraph
    sepsets: SepSetMap
    queries: tuple[QueryRecord, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        _check_removed_pairs(self.graph, self.sepsets)

    def to_dict(self) -> dict:
        return {
            "graph": {
                "vertices": list(self.graph.vertices),
                "directed": [list(e) for e in self.graph.sorted_directed()],
                "undirected": [list(e) for e in self.graph.sorted_undirected()],
            },
            "queries": [
                {
                    "x": q.x,
                    "y": q.y,
                    "Z": list(q.z),
                    "statistic": q.statistic,
                    "decision": q.separated,
                }
                for q in self.queries
            ],
            "sepsets": self.sepsets.as_dict(),
            "warnings": list(self.warnings),
        }


def _check_removed_pairs(graph: MixedGraph, sepsets: SepSetMap) -> None:
    for x, y in combinations(graph.vertices, 2):
        if not graph.adjacent(x, y) and sepsets.get(x, y) is None:
            raise AssertionError(f"removed pair ({x}, {y}) has no separating set")


def _check_v_structures(phase2: MixedGraph, sepsets: SepSetMap) -> None:
    # phase-2 colliders must be absent from their pair's separating set;
    # phase-3 propagation may later create collider patterns without this bound
    for c in phase2.vertices:
        for a, b in combinations(phase2.parents(c), 2):
            if phase2.adjacent(a, b):
                continue
            z = sepsets.get(a, b)
            if z is not None and c in z:
                raise AssertionError(f"collider {c} appears in the separating set of ({a}, {b})")


def pc_skeleton(
    vertices: Iterable[str],
    oracle: SeparationOracle,
    cfg: PcConfig | None = None,
    log: list[QueryRecord] | None = None,
) -> tuple[MixedGraph, SepSetMap]:
    """Phase 1: prune a complete undirected graph by separation queries.

    At level eta, each ordered adjacent pair (x, y) with enough remaining
    neighbors is tested against every size-eta subset of Adjacency(x)\\{y}
    in lexicographic vertex order; the first separating set removes the
    edge immediately and is recorded. Levels grow until every adjacency is
    exhausted or ``max_cond`` is hit.
    """
    verts = tuple(vertices)
    if len(verts) < 2:
        raise ValueError("need at least two vertices")
    cfg = cfg or PcConfig()
    max_cond = cfg.max_cond if cfg.max_cond is not None else max(len(verts) - 2, 0)
    index = {v: i for i, v in enumerate(verts)}
    adj: dict[str, set[str]] = {v: set(verts) - {v} for v in verts}
    sepsets = SepSetMap()

    eta = 0
    while eta <= max_cond:
        pending = any(
            y in adj[x] and len(adj[x] - {y}) >= eta for x in verts for y in verts if x != y
        )
        if not pending:
            break
        for x in verts:
            for y in verts:
                if x == y or y not in adj[x]:
                    continue
                others = adj[x] - {y}
                if len(others) < eta:
                    continue
                candidates = sorted(others, key=index.__getitem__)
                for z in combinations(candidates, eta):
                    separated, statistic = oracle.sep(x, z, y)
                    if log is not None:
                        log.append(QueryRecord(x, y, z, statistic, separated))
                    if separated:
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets.set(x, y, z)
                        break
        eta += 1

    edges = {(x, y) for x in verts for y in adj[x] if index[x] < index[y]}
    return MixedGraph(verts, undirected_edges=edges), sepsets


def orient_v_structures(
    skel: MixedGraph, sepsets: SepSetMap, warnings: list[str] | None = None
) -> MixedGraph:
    """Phase 2: orient a -> c <- b for unshielded triples whose separating
    set excludes c. Pairs proposed in both directions by different triples
    are left undirected with a warning."""
    proposals: dict[frozenset[str], set[tuple[str, str]]] = {}
    for c in skel.vertices:
        for a, b in combinations(skel.neighbors(c), 2):
            if skel.adjacent(a, b):
                continue
            z = sepsets.get(a, b)
            if z is None:
                if warnings is not None:
                    warnings.append(
                        f"no separating set recorded for ({a}, {b}); triple at {c} skipped"
                    )
                continue
            if c not in z:
                proposals.setdefault(frozenset((a, c)), set()).add((a, c))
                proposals.setdefault(frozenset((b, c)), set()).add((b, c))

    directed: list[tuple[str, str]] = []
    undirected: list[tuple[str, str]] = []
    for x, y in skel.sorted_undirected():
        marks = proposals.get(frozenset((x, y)), set())
        if len(marks) == 1:
            directed.append(next(iter(marks)))
        else:
            if len(marks) == 2 and warnings is not None:
                warnings.append(
                    f"conflicting v-structure orientations on {x} - {y}; left undirected"
                )
            undirected.append((x, y))
    return MixedGraph(skel.vertices, directed, undirected)


def _has_directed_path(directed: set[tuple[str, str]], src: str, dst: str) -> bool:
    children: dict[str, list[str]] = {}
    for a, b in directed:
        children.setdefault(a, []).append(b)
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        for w in children.get(u, ()):
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def apply_orientation_rules(
    g: MixedGraph, meek: bool = False, warnings: list[str] | None = None
) -> MixedGraph:
    """Phase 3: propagate orientations to a fixed point.

    Default rules:
      1. a -> b with b - c, a and c nonadjacent, and a the only parent of
         b: orient b -> c.
      2. a - b with a directed path from a to b: orient a -> b.

    With ``meek=True`` the standard Meek closure (R1-R3; R4 never fires
    without background orientations) is applied instead. Oriented edges
    are never reversed.
    """
    verts = g.vertices
    index = {v: i for i, v in enumerate(verts)}
    directed = set(g.directed_edges)
    undirected = set(g.undirected_edges)

    def adjacent(x: str, y: str) -> bool:
        return (x, y) in directed or (y, x) in directed or frozenset((x, y)) in undirected

    def parents(b: str) -> set[str]:
        return {a for a, b2 in directed if b2 == b}

    def orient(a: str, b: str) -> None:
        undirected.discard(frozenset((a, b)))
        directed.add((a, b))

    def pairs() -> list[tuple[str, str]]:
        ps = [tuple(sorted(p, key=index.__getitem__)) for p in undirected]
        return sorted(ps, key=lambda e: (index[e[0]], index[e[1]]))

    changed = True
    while changed:
        changed = False
        if not meek:
            for a, b in sorted(directed, key=lambda e: (index[e[0]], index[e[1]])):
                if parents(b) != {a}:
                    continue
                for c in verts:
                    if c in (a, b) or adjacent(a, c):
                        continue
                    if frozenset((b, c)) in undirected:
                        orient(b, c)
                        changed = True
            for a, b in pairs():
                if frozenset((a, b)) not in undirected:
                    continue
                fwd = _has_directed_path(directed, a, b)
                back = _has_directed_path(directed, b, a)
                if fwd and back:
                    if warnings is not None:
                        warnings.append(
                            f"directed paths both ways between {a} and {b}; edge left undirected"
                        )
                    continue
                if fwd:
                    orient(a, b)
                    changed = True
                elif back:
                    orient(b, a)
                    changed = True
        else:
            # Meek R1
            for a, b in sorted(directed, key=lambda e: (index[e[0]], index[e[1]])):
                for c in verts:
                    if c in (a, b) or adjacent(a, c):
                        continue
                    if frozenset((b, c)) in undirected:
                        orient(b, c)
                        changed = True
            # Meek R2
            for a, b in pairs():
                if frozenset((a, b)) not in undirected:
                    continue
                if any((a, c) in directed and (c, b) in directed for c in verts):
                    orient(a, b)
                    changed = True
                elif any((b, c) in directed and (c, a) in directed for c in verts):
                    orient(b, a)
                    changed = True
            # Meek R3
            for a, b in pairs():
                if frozenset((a, b)) not in undirected:
                    continue
                for first, second in ((a, b), (b, a)):
                    spokes = [
                        c
                        for c in verts
                        if frozenset((first, c)) in undirected and (c, second) in directed
                    ]
                    fired = False
                    for c, d in combinations(spokes, 2):
                        if not adjacent(c, d):
                            orient(first, second)
                            changed = True
                            fired = True
                            break
                    if fired:
                        break

    return MixedGraph(verts, directed, undirected)


def reconstruct_with_oracle(
    vertices: Iterable[str],
    oracle: SeparationOracle,
    cfg: PcConfig | None = None,
) -> ReconstructionResult:
    """Run all three phases against an arbitrary separation oracle."""
    cfg = cfg or PcConfig()
    records: list[QueryRecord] = []
    warnings: list[str] = []
    skel, sepsets = pc_skeleton(vertices, oracle, cfg, log=records)
    oriented = orient_v_structures(skel, sepsets, warnings)
    _check_v_structures(oriented, sepsets)
    result = apply_orientation_rules(oriented, meek=cfg.meek, warnings=warnings)
    if not cfg.meek:
        closure = apply_orientation_rules(oriented, meek=True)
        extra = closure.directed_edges - result.directed_edges
        if extra:
            listed = ", ".join(f"{a}->{b}" for a, b in sorted(extra))
            warnings.append(f"full Meek closure would additionally orient: {listed}")
    return ReconstructionResult(result, sepsets, tuple(records), tuple(warnings))


def reconstruct(
    data: TimeSeriesSet | SpectralMatrix,
    cfg: PcConfig | None = None,
) -> ReconstructionResult:
    """Full data-mode pipeline: (Welch estimate ->) PC search -> orientation."""
    cfg = cfg or PcConfig()
    if isinstance(data, TimeSeriesSet):
        phi = welch_cross_psd(data, cfg.welch)
    elif isinstance(data, SpectralMatrix):
        phi = data
    else:
        raise TypeError(f"expected TimeSeriesSet or SpectralMatrix, got {type(data).__name__}")
    if phi.n_channels < 2:
        raise ValueError("need at least two channels to reconstruct")
    return reconstruct_with_oracle(phi.channels, WsepOracle(phi, cfg.wsep), cfg)
