"""Shared test utilities: brute-force graph oracles and random generators.

The oracles here deliberately re-derive results from first principles
(path enumeration, exhaustive orientation search) so the package
implementations are checked against independent logic.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from ampflow.graphs import DirectedGraph, v_structures
from ampflow.netlist import Netlist, RlcBlock, StageParams
from ampflow.rational import ContinuousRational


def dsep_by_path_enumeration(g: DirectedGraph, x: str, z, y: str) -> bool:
    """d-separation straight from the blocked-path definition.

    Enumerates every simple path between x and y (edges traversed in either
    direction); a path is blocked if some interior vertex is a non-collider
    in Z, or a collider with no descendant (itself included) in Z.
    """
    zset = set(z)
    neighbors: dict[str, set[str]] = {v: set() for v in g.vertices}
    for a, b in g.edges:
        neighbors[a].add(b)
        neighbors[b].add(a)

    paths: list[list[str]] = []

    def extend(path: list[str]) -> None:
        u = path[-1]
        for w in neighbors[u]:
            if w in path:
                continue
            if w == y:
                paths.append(path + [w])
            else:
                extend(path + [w])

    extend([x])

    def blocked(path: list[str]) -> bool:
        for i in range(1, len(path) - 1):
            prev, p, nxt = path[i - 1], path[i], path[i + 1]
            is_collider = g.has_edge(prev, p) and g.has_edge(nxt, p)
            if is_collider:
                if not (g.descendants(p) & zset):
                    return True
            elif p in zset:
                return True
        return False

    return all(blocked(p) for p in paths)


def random_dag(rng: np.random.Generator, n: int, p: float) -> DirectedGraph:
    labels = [f"v{i + 1}" for i in range(n)]
    order = list(rng.permutation(labels))
    edges = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    return DirectedGraph(labels, edges)


def all_dags(n: int):
    """Every labeled DAG on n vertices (only sane for n <= 4)."""
    labels = [f"v{i + 1}" for i in range(n)]
    pairs = list(combinations(labels, 2))
    for marks in product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), mark in zip(pairs, marks):
            if mark == 1:
                edges.append((a, b))
            elif mark == 2:
                edges.append((b, a))
        g = DirectedGraph(labels, edges)
        if g.is_acyclic():
            yield g


def markov_equivalence_class(g: DirectedGraph) -> list[DirectedGraph]:
    """All DAGs with the same skeleton and v-structures, by exhaustive search."""
    pairs = sorted({tuple(sorted(e)) for e in g.edges})
    base_v = v_structures(g)
    members = []
    for bits in product((0, 1), repeat=len(pairs)):
        edges = [(a, b) if bit == 0 else (b, a) for (a, b), bit in zip(pairs, bits)]
        cand = DirectedGraph(g.vertices, edges)
        if cand.is_acyclic() and v_structures(cand) == base_v:
            members.append(cand)
    return members


def compelled_edges(members: list[DirectedGraph]) -> set[tuple[str, str]]:
    """Edges oriented identically in every member of an equivalence class."""
    out = set()
    first = members[0]
    for a, b in first.edges:
        if all(m.has_edge(a, b) for m in members):
            out.add((a, b))
    return out


def random_netlist(
    rng: np.random.Generator,
    n_nodes: int,
    edge_prob: float = 0.4,
    fs_hz: float = 1.0e6,
) -> Netlist:
    """Random DAG topology realized as a stage/block netlist.

    One stage per incoming edge (roots get an undriven stage), high-pass
    coupling blocks with diverse component values. Modes mix CS, CD, and
    cascode stages.
    """
    nodes = [f"v{i + 1}" for i in range(n_nodes)]
    edges = [
        (nodes[i], nodes[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    children = {nd: [b for a, b in edges if a == nd] for nd in nodes}
    parents = {nd: [a for a, b in edges if b == nd] for nd in nodes}
    sid = {(p, nd): f"s_{p}_{nd}" for p, nd in edges}
    blocks = []
    for nd in nodes:
        taps = [sid[(nd, c)] for c in children[nd]]
        blocks.append(
            RlcBlock.highpass_coupler(
                f"b_{nd}",
                nd,
                r_load_ohm=float(rng.uniform(450, 850)),
                c_farad=float(np.exp(rng.uniform(np.log(5e-10), np.log(4e-9)))),
                r_gate_ohm=8000.0,
                tap_stages=taps,
            )
        )
    stages = []

    def source_impedance() -> ContinuousRational:
        kind = rng.random()
        if kind < 0.5:
            return ContinuousRational.constant(0.0)
        if kind < 0.8:
            return ContinuousRational.constant(float(rng.uniform(50.0, 300.0)))
        # series RC degeneration: R + 1/(sC)
        r = float(rng.uniform(50.0, 300.0))
        c = float(np.exp(rng.uniform(np.log(1e-8), np.log(1e-6))))
        return ContinuousRational((1.0, c * r), (0.0, c))

    def make_stage(name: str, nd: str, tap) -> StageParams:
        gm = float(np.exp(rng.uniform(np.log(0.9e-3), np.log(2.0e-3))))
        rds = float(rng.uniform(3e4, 8e4))
        mode = rng.choice(["CS", "CS", "CS", "CD", "CASCODE"])
        kwargs = dict(input_tap=tap, zs=source_impedance())
        if mode == "CASCODE":
            kwargs.update(
                gm2_s=float(rng.uniform(1.2e-3, 2.6e-3)),
                rds2_ohm=float(rng.uniform(3e4, 8e4)),
            )
        return StageParams(name, str(mode), gm, rds, nd, **kwargs)

    for nd in nodes:
        if not parents[nd]:
            stages.append(make_stage(f"s_root_{nd}", nd, None))
        for p in parents[nd]:
            stages.append(make_stage(sid[(p, nd)], nd, (f"b_{p}", sid[(p, nd)])))
    return Netlist(fs_hz, nodes, stages, blocks)


def band_relative_error(est: np.ndarray, ref: np.ndarray) -> float:
    """Band-averaged relative Frobenius error between matrix stacks."""
    num = np.linalg.norm(est - ref, axis=(-2, -1)).sum()
    den = np.linalg.norm(ref, axis=(-2, -1)).sum()
    return float(num / den)
