"""Reference amplifier netlists used by the validation suite and docs.

Three fixed topologies: a 3-stage chain (CS, CS, CD), a 5-stage cascode
chain with an optional open-circuit fault, and a 9-node grid mesh. Stage
and block values are frozen, deliberately diverse draws: identical stages
sit close to the cancellation surfaces where a Wiener weight of a present
edge nearly vanishes under conditioning, which defeats threshold tests.
The mesh draw was selected so the smallest band-averaged Wiener magnitude
over any present edge and any conditioning set of size <= 4 stays above
0.10 (twice the default threshold), marginal submodels included.
"""

from __future__ import annotations

from .netlist import Netlist, RlcBlock, StageParams
from .rational import ContinuousRational

FS_HZ = 1.0e6

_CHAIN_GM = (2.1e-3, 1.7e-3, 2.4e-3)
_CHAIN_RDS = (5.2e4, 3.8e4, 6.1e4)
_CHAIN_RD = (620.0, 540.0, 700.0)
_CHAIN_C = (1.0e-6, 8.2e-10, 1.5e-9)
_CHAIN_RG = 8000.0


def chain_netlist(fs_hz: float = FS_HZ) -> Netlist:
    """Three-stage chain v1 -> v2 -> v3 (CS, CS, CD); the first gate hangs
    on a source-only block, so v1 has no measured parent."""
    modes = ("CS", "CS", "CD")
    nodes = ["v1", "v2", "v3"]
    blocks = [RlcBlock.source_block("b_src", {"s1": ContinuousRational.constant(1.0)})]
    stages = []
    for i, node in enumerate(nodes):
        taps = [f"s{i + 2}"] if i + 1 < len(nodes) else []
        blocks.append(
            RlcBlock.highpass_coupler(f"b{i + 1}", node, _CHAIN_RD[i], _CHAIN_C[i], _CHAIN_RG, taps)
        )
        tap = ("b_src", "s1") if i == 0 else (f"b{i}", f"s{i + 1}")
        stages.append(
            StageParams(
                f"s{i + 1}",
                modes[i],
                _CHAIN_GM[i],
                _CHAIN_RDS[i],
                node,
                input_tap=tap,
                flicker_corner_hz=2000.0,
            )
        )
    return Netlist(fs_hz, nodes, stages, blocks)


_CASCODE_GM = (1.3e-3, 1.05e-3, 1.55e-3, 0.95e-3, 1.4e-3)
_CASCODE_GM2 = (1.8e-3, 2.3e-3, 1.6e-3, 2.0e-3, 2.6e-3)
_CASCODE_RDS = (4.4e4, 5.6e4, 3.9e4, 6.3e4, 4.8e4)
_CASCODE_RDS2 = (5.1e4, 4.2e4, 6.0e4, 4.6e4, 5.5e4)
_CASCODE_RD = (660.0, 740.0, 580.0, 810.0, 620.0)
_CASCODE_C = (1.3e-9, 6.4e-10, 2.1e-9, 9.1e-10, 1.6e-9)


def cascode_chain_netlist(fault_open_tap: bool = False, fs_hz: float = FS_HZ) -> Netlist:
    """Five cascode stages in a chain v1 -> ... -> v5.

    With ``fault_open_tap`` the coupling into stage 5's gate is open, which
    removes the v4 -> v5 signal path while leaving stage 5 biased and noisy.
    """
    nodes = [f"v{i}" for i in range(1, 6)]
    blocks, stages = [], []
    for i, node in enumerate(nodes):
        feeds_next = i + 1 < len(nodes) and not (fault_open_tap and i == 3)
        taps = [f"s{i + 2}"] if feeds_next else []
        blocks.append(
            RlcBlock.highpass_coupler(
                f"b{i + 1}", node, _CASCODE_RD[i], _CASCODE_C[i], _CHAIN_RG, taps
            )
        )
        if i == 0 or (fault_open_tap and i == 4):
            tap = None
        else:
            tap = (f"b{i}", f"s{i + 1}")
        stages.append(
            StageParams(
                f"s{i + 1}",
                "CASCODE",
                _CASCODE_GM[i],
                _CASCODE_RDS[i],
                node,
                input_tap=tap,
                gm2_s=_CASCODE_GM2[i],
                rds2_ohm=_CASCODE_RDS2[i],
                flicker_corner_hz=1500.0,
            )
        )
    return Netlist(fs_hz, nodes, stages, blocks)


MESH_EDGES = (
    ("v1", "v2"),
    ("v2", "v3"),
    ("v4", "v5"),
    ("v5", "v6"),
    ("v7", "v8"),
    ("v8", "v9"),
    ("v1", "v4"),
    ("v4", "v7"),
    ("v2", "v5"),
    ("v5", "v8"),
    ("v3", "v6"),
    ("v6", "v9"),
)

_MESH_GM = (
    2.0778e-3,
    1.1468e-3,
    1.1971e-3,
    1.0408e-3,
    1.1151e-3,
    1.0653e-3,
    1.0275e-3,
    1.2918e-3,
    1.3531e-3,
    1.0474e-3,
    0.9463e-3,
    1.2122e-3,
    1.8850e-3,
)
_MESH_RDS = (
    6.7436e4,
    5.5490e4,
    7.5521e4,
    3.9445e4,
    3.2521e4,
    6.4971e4,
    7.9860e4,
    3.7841e4,
    5.5982e4,
    3.8159e4,
    4.2797e4,
    5.1948e4,
    3.1773e4,
)
_MESH_RD = (649.3, 510.1, 572.5, 561.6, 638.6, 717.0, 471.8, 828.7, 532.3)
_MESH_C = (3.48e-9, 1.18e-9, 3.05e-9, 5.96e-10, 1.77e-9, 7.8e-10, 1.96e-9, 7.84e-10, 1.09e-9)


def mesh9_netlist(fs_hz: float = FS_HZ) -> Netlist:
    """Nine output nodes in a 3x3 grid mesh (rows chained, columns chained).

    One common-source stage per incoming edge; root node v1 carries an
    undriven stage. Nodes v3 and v7 each have a single child and no edge
    between them, so dropping both measurements leaves a model of the same
    class (used by the partial-measurement scenario).
    """
    nodes = [f"v{i}" for i in range(1, 10)]
    children = {nd: [b for a, b in MESH_EDGES if a == nd] for nd in nodes}
    parents = {nd: [a for a, b in MESH_EDGES if b == nd] for nd in nodes}
    slots: list[tuple[str, str]] = []
    for nd in nodes:
        if not parents[nd]:
            slots.append(("", nd))
        for p in parents[nd]:
            slots.append((p, nd))
    sid = {(p, nd): f"s_{p}_{nd}" for p, nd in slots if p}
    blocks = []
    for i, nd in enumerate(nodes):
        taps = [sid[(nd, c)] for c in children[nd]]
        blocks.append(
            RlcBlock.highpass_coupler(f"b_{nd}", nd, _MESH_RD[i], _MESH_C[i], _CHAIN_RG, taps)
        )
    stages = []
    for k, (p, nd) in enumerate(slots):
        if not p:
            stages.append(StageParams(f"s_root_{nd}", "CS", _MESH_GM[k], _MESH_RDS[k], nd))
        else:
            stages.append(
                StageParams(
                    sid[(p, nd)],
                    "CS",
                    _MESH_GM[k],
                    _MESH_RDS[k],
                    nd,
                    input_tap=(f"b_{p}", sid[(p, nd)]),
                )
            )
    return Netlist(fs_hz, nodes, stages, blocks)
