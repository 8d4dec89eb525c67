"""Amplifier netlists: stages, passive coupling blocks, and JSON round-trips.

A netlist lists output nodes, the amplifier stages whose output ports
attach to them, and the passive blocks that both load each node and feed
downstream gates through open-circuit tap transfers. Tap transfers are
supplied directly as rationals; the two block constructors cover the
canonical coupling structures (series-C into shunt-R bias, resistive
divider).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CyclicTopology, SchemaError, UnknownVertex
from .graphs import DirectedGraph
from .rational import R_ZERO, ContinuousRational

NETLIST_SCHEMA = "ldim_netlist_v1"

MODE_CS = "CS"
MODE_CD = "CD"
MODE_CASCODE = "CASCODE"
_MODES = (MODE_CS, MODE_CD, MODE_CASCODE)

_BOLTZMANN = 1.380649e-23
_ROOM_TEMP_K = 300.0


def default_thermal_current_psd(gm_s: float) -> float:
    """Channel thermal noise current PSD, 4 k T (2/3) g_m, in A^2/Hz."""
    return 4.0 * _BOLTZMANN * _ROOM_TEMP_K * (2.0 / 3.0) * gm_s


@dataclass(frozen=True)
class StageParams:
    """One amplifier stage: device small-signal parameters plus placement.

    ``zs`` is the impedance from the non-output device terminal to ground.
    For CASCODE stages ``gm_s``/``rds_ohm`` describe the common-source
    device and ``gm2_s``/``rds2_ohm`` the stacked common-gate device.
    ``input_tap`` is (block id, tap key) or None for an undriven gate.
    """

    id: str
    mode: str
    gm_s: float
    rds_ohm: float
    output_node: str
    zs: ContinuousRational = R_ZERO
    input_tap: tuple[str, str] | None = None
    gm2_s: float | None = None
    rds2_ohm: float | None = None
    iw_a2_hz: float | None = None
    flicker_corner_hz: float | None = None
    flicker_order: int = 12

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"stage {self.id!r}: mode must be one of {_MODES}")
        if not (math.isfinite(self.gm_s) and self.gm_s > 0):
            raise ValueError(f"stage {self.id!r}: gm_s must be positive")
        if not (math.isfinite(self.rds_ohm) and self.rds_ohm > 0):
            raise ValueError(f"stage {self.id!r}: rds_ohm must be positive")
        if self.mode == MODE_CASCODE:
            if self.gm2_s is None or self.rds2_ohm is None:
                raise ValueError(f"stage {self.id!r}: cascode needs gm2_s and rds2_ohm")
            if self.gm2_s <= 0 or self.rds2_ohm <= 0:
                raise ValueError(f"stage {self.id!r}: cascode device parameters must be positive")
        elif self.gm2_s is not None or self.rds2_ohm is not None:
            raise ValueError(f"stage {self.id!r}: gm2_s/rds2_ohm only apply to cascode stages")
        if self.iw_a2_hz is not None and self.iw_a2_hz <= 0:
            raise ValueError(f"stage {self.id!r}: iw_a2_hz must be positive")

    def thermal_current_psd(self) -> float:
        if self.iw_a2_hz is not None:
            return self.iw_a2_hz
        return default_thermal_current_psd(self.gm_s)


@dataclass(frozen=True)
class RlcBlock:
    """Passive block owning at most one output node.

    ``zo`` is the load impedance the block presents at its node; ``taps``
    are open-circuit voltage transfers from the node to downstream gates,
    keyed by the stage id they feed.
    """

    id: str
    node: str | None
    zo: ContinuousRational | None
    taps: Mapping[str, ContinuousRational] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "taps", dict(self.taps))

    @classmethod
    def highpass_coupler(
        cls,
        block_id: str,
        node: str,
        r_load_ohm: float,
        c_farad: float,
        r_gate_ohm: float,
        tap_stages: Iterable[str] = (),
    ) -> "RlcBlock":
        """Load resistor with series-C / shunt-R coupling branches.

        Each tapped stage sees the high-pass divider s C Rg / (1 + s C Rg);
        the node load is the resistor in parallel with every branch.
        """
        taps = list(tap_stages)
        branch_y = ContinuousRational((0.0, c_farad), (1.0, c_farad * r_gate_ohm))
        y = ContinuousRational.constant(1.0 / r_load_ohm) + len(taps) * branch_y
        tap = ContinuousRational((0.0, c_farad * r_gate_ohm), (1.0, c_farad * r_gate_ohm))
        return cls(block_id, node, 1.0 / y, {sid: tap for sid in taps})

    @classmethod
    def resistive_divider(
        cls,
        block_id: str,
        node: str,
        r_load_ohm: float,
        r_top_ohm: float,
        r_bottom_ohm: float,
        tap_stages: Iterable[str] = (),
    ) -> "RlcBlock":
        """Load resistor with resistive divider branches to downstream gates."""
        taps = list(tap_stages)
        r_branch = r_top_ohm + r_bottom_ohm
        y = 1.0 / r_load_ohm + len(taps) / r_branch
        tap = ContinuousRational.constant(r_bottom_ohm / r_branch)
        return cls(block_id, node, ContinuousRational.constant(1.0 / y), {sid: tap for sid in taps})

    @classmethod
    def source_block(cls, block_id: str, taps: Mapping[str, ContinuousRational]) -> "RlcBlock":
        """Block attached to an unmeasured source rather than an output node."""
        return cls(block_id, None, None, dict(taps))


class Netlist:
    """Validated interconnection of stages and blocks at a sample rate."""

    __slots__ = ("_fs_hz", "_nodes", "_stages", "_blocks", "_block_by_node")

    def __init__(
        self,
        fs_hz: float,
        nodes: Iterable[str],
        stages: Iterable[StageParams],
        blocks: Iterable[RlcBlock],
    ):
        if not (math.isfinite(fs_hz) and fs_hz > 0):
            raise ValueError(f"fs_hz must be positive, got {fs_hz}")
        self._fs_hz = float(fs_hz)
        self._nodes = tuple(str(n) for n in nodes)
        if len(set(self._nodes)) != len(self._nodes):
            raise ValueError("node labels must be unique")
        self._stages = tuple(stages)
        self._blocks = tuple(blocks)

        ids = [s.id for s in self._stages]
        if len(set(ids)) != len(ids):
            raise ValueError("stage ids must be unique")
        bids = [b.id for b in self._blocks]
        if len(set(bids)) != len(bids):
            raise ValueError("block ids must be unique")
        block_by_id = {b.id: b for b in self._blocks}

        self._block_by_node: dict[str, RlcBlock] = {}
        for b in self._blocks:
            if b.node is not None:
                if b.node not in self._nodes:
                    raise UnknownVertex(f"block {b.id!r} owns unknown node {b.node!r}")
                if b.node in self._block_by_node:
                    raise ValueError(f"node {b.node!r} is owned by more than one block")
                self._block_by_node[b.node] = b

        fed: set[str] = set()
        for s in self._stages:
            if s.output_node not in self._nodes:
                raise UnknownVertex(f"stage {s.id!r} outputs to unknown node {s.output_node!r}")
            fed.add(s.output_node)
            if s.input_tap is not None:
                bid, tap = s.input_tap
                block = block_by_id.get(bid)
                if block is None:
                    raise UnknownVertex(f"stage {s.id!r} taps unknown block {bid!r}")
                if tap not in block.taps:
                    raise ValueError(f"stage {s.id!r} taps missing key {tap!r} of block {bid!r}")
                if block.node == s.output_node:
                    raise ValueError(
                        f"stage {s.id!r} taps the block of its own output node "
                        f"{s.output_node!r} (direct gate-output path)"
                    )
        for n in self._nodes:
            if n not in fed:
                raise ValueError(f"output node {n!r} has no attached stage")

        try:
            self.influence_graph().topological_order()
        except Exception as exc:  # CyclicGraph
            raise CyclicTopology(str(exc)) from exc

    @property
    def fs_hz(self) -> float:
        return self._fs_hz

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def stages(self) -> tuple[StageParams, ...]:
        return self._stages

    @property
    def blocks(self) -> tuple[RlcBlock, ...]:
        return self._blocks

    def block_of_node(self, node: str) -> RlcBlock | None:
        return self._block_by_node.get(node)

    def block_by_id(self, block_id: str) -> RlcBlock:
        for b in self._blocks:
            if b.id == block_id:
                return b
        raise UnknownVertex(f"unknown block {block_id!r}")

    def stages_at(self, node: str) -> tuple[StageParams, ...]:
        return tuple(s for s in self._stages if s.output_node == node)

    def influence_graph(self) -> DirectedGraph:
        """Edge m -> l iff some stage feeding l taps the block owned by m."""
        edges = set()
        for s in self._stages:
            if s.input_tap is None:
                continue
            block = self.block_by_id(s.input_tap[0])
            if block.node is not None:
                edges.add((block.node, s.output_node))
        return DirectedGraph(self._nodes, edges)


def _rational_to_json(r: ContinuousRational | None):
    if r is None:
        return None
    return {"num": list(r.num), "den": list(r.den)}


def _rational_from_json(obj, where: str) -> ContinuousRational:
    if not isinstance(obj, dict) or "num" not in obj or "den" not in obj:
        raise SchemaError(f"{where}: expected an object with 'num' and 'den' arrays")
    try:
        return ContinuousRational(tuple(obj["num"]), tuple(obj["den"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def netlist_to_dict(nl: Netlist) -> dict:
    stages = []
    for s in nl.stages:
        row = {
            "id": s.id,
            "mode": s.mode,
            "gm_s": s.gm_s,
            "rds_ohm": s.rds_ohm,
            "zs": _rational_to_json(s.zs),
            "output_node": s.output_node,
            "input_tap": None
            if s.input_tap is None
            else {"block": s.input_tap[0], "tap": s.input_tap[1]},
        }
        if s.mode == MODE_CASCODE:
            row["gm2_s"] = s.gm2_s
            row["rds2_ohm"] = s.rds2_ohm
        noise = {}
        if s.iw_a2_hz is not None:
            noise["iw_a2_hz"] = s.iw_a2_hz
        if s.flicker_corner_hz is not None:
            noise["flicker_corner_hz"] = s.flicker_corner_hz
            noise["flicker_order"] = s.flicker_order
        if noise:
            row["noise"] = noise
        stages.append(row)
    blocks = [
        {
            "id": b.id,
            "node": b.node,
            "zo": _rational_to_json(b.zo),
            "taps": {sid: _rational_to_json(r) for sid, r in sorted(b.taps.items())},
        }
        for b in nl.blocks
    ]
    return {
        "schema": NETLIST_SCHEMA,
        "fs_hz": nl.fs_hz,
        "nodes": list(nl.nodes),
        "stages": stages,
        "blocks": blocks,
    }


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}.{key}: missing required field")
    return obj[key]


def netlist_from_dict(obj: dict) -> Netlist:
    if not isinstance(obj, dict):
        raise SchemaError("top level: expected a JSON object")
    if obj.get("schema") != NETLIST_SCHEMA:
        raise SchemaError(f"schema: expected {NETLIST_SCHEMA!r}, got {obj.get('schema')!r}")
    fs = _require(obj, "fs_hz", "top level")
    nodes = _require(obj, "nodes", "top level")
    stages = []
    for i, row in enumerate(_require(obj, "stages", "top level")):
        where = f"stages[{i}]"
        tap = row.get("input_tap")
        if tap is not None:
            if not isinstance(tap, dict) or "block" not in tap or "tap" not in tap:
                raise SchemaError(f"{where}.input_tap: expected {{block, tap}} or null")
            tap = (tap["block"], tap["tap"])
        noise = row.get("noise") or {}
        try:
            stages.append(
                StageParams(
                    id=_require(row, "id", where),
                    mode=_require(row, "mode", where),
                    gm_s=float(_require(row, "gm_s", where)),
                    rds_ohm=float(_require(row, "rds_ohm", where)),
                    output_node=_require(row, "output_node", where),
                    zs=_rational_from_json(row.get("zs") or {"num": [0.0], "den": [1.0]}, f"{where}.zs"),
                    input_tap=tap,
                    gm2_s=row.get("gm2_s"),
                    rds2_ohm=row.get("rds2_ohm"),
                    iw_a2_hz=noise.get("iw_a2_hz"),
                    flicker_corner_hz=noise.get("flicker_corner_hz"),
                    flicker_order=int(noise.get("flicker_order", 12)),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    blocks = []
    for i, row in enumerate(_require(obj, "blocks", "top level")):
        where = f"blocks[{i}]"
        zo = row.get("zo")
        taps_obj = row.get("taps") or {}
        blocks.append(
            RlcBlock(
                id=_require(row, "id", where),
                node=row.get("node"),
                zo=None if zo is None else _rational_from_json(zo, f"{where}.zo"),
                taps={
                    sid: _rational_from_json(r, f"{where}.taps[{sid}]")
                    for sid, r in taps_obj.items()
                },
            )
        )
    try:
        return Netlist(float(fs), nodes, stages, blocks)
    except (ValueError, UnknownVertex) as exc:
        # CyclicTopology keeps its own type; everything else is a file problem
        raise SchemaError(str(exc)) from exc


def save_netlist(nl: Netlist, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(netlist_to_dict(nl), fh, indent=2)
        fh.write("\n")


def load_netlist(path) -> Netlist:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return netlist_from_dict(obj)
