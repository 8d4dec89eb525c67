"""Compile an amplifier netlist into a linear dynamic influence model.

Per output node, every attached stage contributes a gate-to-node transfer
H_k and a noise transfer P_k sharing one node denominator; entries of the
model's transfer matrix are sums of H_k times the tap transfer feeding
stage k, discretized by the bilinear map. Stage noise currents aggregate
into one shaped source per node, which keeps the noise cross-spectrum
diagonal by construction.
"""

from __future__ import annotations

from numpy.polynomial import polynomial as npoly

from .errors import MissingImpedance, UnstableDiscretization
from .graphs import DirectedGraph
from .model import Ldim
from .netlist import MODE_CASCODE, MODE_CD, Netlist, StageParams
from .noise import NoiseSpec
from .rational import ContinuousRational, bilinear


def m_alpha(st: StageParams) -> ContinuousRational:
    """Source-degeneration factor of a common-source device: 1 + gm Zs + Zs/rds."""
    return 1.0 + st.gm_s * st.zs + st.zs * (1.0 / st.rds_ohm)


def m_beta(st: StageParams) -> ContinuousRational:
    """Load factor of a common-drain device: 1 + Zs/rds."""
    return 1.0 + st.zs * (1.0 / st.rds_ohm)


def cascode_output_resistance(st: StageParams) -> float:
    """Boosted output resistance of the stacked pair: rds1 + rds2 + gm2 rds1 rds2."""
    return st.rds_ohm + st.rds2_ohm + st.gm2_s * st.rds_ohm * st.rds2_ohm


def _cs_equivalent(st: StageParams) -> StageParams:
    """Cascode stages compile as a common-source device with boosted rds."""
    if st.mode != MODE_CASCODE:
        return st
    return StageParams(
        id=st.id,
        mode="CS",
        gm_s=st.gm_s,
        rds_ohm=cascode_output_resistance(st),
        output_node=st.output_node,
        zs=st.zs,
        input_tap=st.input_tap,
        iw_a2_hz=st.iw_a2_hz,
        flicker_corner_hz=st.flicker_corner_hz,
        flicker_order=st.flicker_order,
    )


def node_voltage_model(
    node: str, nl: Netlist
) -> tuple[dict[str, ContinuousRational], dict[str, ContinuousRational]]:
    """Per-stage gate transfer H_k and noise transfer P_k at one output node.

    All transfers at a node are assembled over one common denominator so
    they share an identical denominator polynomial exactly:

        H_k = -gm_k Zo / M_k / (1 + sum_cs T_j + sum_cd S_j)
        P_k = -Zo / M_k / (same denominator)

    with T_j = Zo/(rds_j M_j) for common-source stages and
    S_j = Zo (gm_j + 1/rds_j)/M_j for common-drain stages.
    """
    block = nl.block_of_node(node)
    if block is None or block.zo is None:
        raise MissingImpedance(f"output node {node!r} has no load impedance")
    stages = [_cs_equivalent(s) for s in nl.stages_at(node)]
    if not stages:
        raise MissingImpedance(f"output node {node!r} has no attached stage")

    z_n, z_d = block.zo.num, block.zo.den
    factors = []  # per stage: (m_num, m_den, loading coefficient)
    for s in stages:
        if s.mode == MODE_CD:
            m = m_beta(s)
            loading = s.gm_s + 1.0 / s.rds_ohm
        else:
            m = m_alpha(s)
            loading = 1.0 / s.rds_ohm
        factors.append((m.num, m.den, loading))

    def prod_except(skip: int):
        acc = (1.0,)
        for i, (m_num, _, _) in enumerate(factors):
            if i != skip:
                acc = npoly.polymul(acc, m_num)
        return acc

    prod_all = prod_except(-1)
    den = npoly.polymul(z_d, prod_all)
    for i, (_, m_den, loading) in enumerate(factors):
        term = npoly.polymul(z_n, npoly.polymul(m_den, prod_except(i)))
        den = npoly.polyadd(den, loading * term)

    h: dict[str, ContinuousRational] = {}
    p: dict[str, ContinuousRational] = {}
    for i, s in enumerate(stages):
        m_den = factors[i][1]
        shared = npoly.polymul(z_n, npoly.polymul(m_den, prod_except(i)))
        h[s.id] = ContinuousRational(tuple(-s.gm_s * shared), tuple(den))
        p[s.id] = ContinuousRational(tuple(-shared), tuple(den))
    return h, p


def compile_netlist(nl: Netlist) -> Ldim:
    """Build the influence model of a netlist.

    Transfer entry (l0, lm) sums H_k Z_k over the stages feeding l0 whose
    gates tap node lm's block; every sum is discretized by the bilinear
    map at the netlist sample rate. Each node's noise is the sum of its
    stages' current noise shaped by the discretized P_k, so noise stays
    independent across channels.
    """
    transfers_s: dict[tuple[str, str], ContinuousRational] = {}
    noise: dict[str, list[NoiseSpec]] = {}
    cascode_ids = [s.id for s in nl.stages if s.mode == MODE_CASCODE]

    for node in nl.nodes:
        h, p = node_voltage_model(node, nl)
        components: list[NoiseSpec] = []
        for s in nl.stages_at(node):
            tap = s.input_tap
            if tap is not None:
                block = nl.block_by_id(tap[0])
                if block.node is not None:
                    z_k = block.taps[tap[1]]
                    entry = h[s.id] * z_k
                    key = (node, block.node)
                    transfers_s[key] = transfers_s.get(key, 0.0) + entry
            variance = s.thermal_current_psd() * nl.fs_hz / 2.0
            try:
                shaping = bilinear(p[s.id], nl.fs_hz)
            except ValueError as exc:
                raise UnstableDiscretization(
                    f"noise transfer of stage {s.id!r} at node {node!r}: {exc}"
                ) from exc
            components.append(
                NoiseSpec(
                    variance=variance,
                    flicker_corner_hz=s.flicker_corner_hz,
                    flicker_order=s.flicker_order,
                    shaping=shaping,
                )
            )
        noise[node] = components

    transfers: dict[tuple[str, str], object] = {}
    for key, rat in transfers_s.items():
        try:
            transfers[key] = bilinear(rat, nl.fs_hz)
        except ValueError as exc:
            raise UnstableDiscretization(f"entry {key}: {exc}") from exc

    metadata: dict[str, object] = {"source": "netlist", "schema": "ldim_model_v1"}
    if cascode_ids:
        metadata["cascode_equivalent_stages"] = cascode_ids
        metadata["notes"] = [
            "cascode stages compiled as common-source devices with output "
            "resistance rds1 + rds2 + gm2*rds1*rds2"
        ]
    return Ldim(nl.nodes, transfers, noise, nl.fs_hz, metadata)


def generative_graph_of_netlist(nl: Netlist) -> DirectedGraph:
    """Ground-truth influence graph: edge lm -> l0 iff a stage at l0 taps lm's block."""
    return nl.influence_graph()
