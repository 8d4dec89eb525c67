"""Influence-flow modeling and reconstruction for multistage transistor amplifiers.

Compile stage/block netlists into linear dynamic influence models, simulate
their noise-driven node voltages, reconstruct the influence graph from
measurements with a Wiener-separation-augmented PC search, and diagnose
broken signal paths by graph comparison.
"""

from .compiler import (
    cascode_output_resistance,
    compile_netlist,
    generative_graph_of_netlist,
    m_alpha,
    m_beta,
    node_voltage_model,
)
from .errors import (
    AmpflowError,
    CyclicGraph,
    CyclicModel,
    CyclicTopology,
    InsufficientData,
    InvalidNoise,
    MissingImpedance,
    NumericalSingularity,
    SchemaError,
    SingularMapping,
    SingularPsd,
    UnknownVertex,
    UnstableDiscretization,
    VertexMismatch,
)
from .estimator import WienerPC
from .fault import FAULT_SUSPECTED, HEALTHY, FaultReport, diagnose
from .graphs import (
    DirectedGraph,
    MixedGraph,
    SepSetMap,
    d_separated,
    directed_from_dot,
    from_dot,
    marginalize,
    skeleton,
    v_structures,
)
from .model import (
    Ldim,
    TimeSeriesSet,
    analytic_output_psd,
    analytic_output_psd_grid,
    generative_graph,
    ldim_from_dict,
    ldim_to_dict,
    load_ldim,
    save_ldim,
    simulate,
)
from .netlist import (
    Netlist,
    RlcBlock,
    StageParams,
    load_netlist,
    netlist_from_dict,
    netlist_to_dict,
    save_netlist,
)
from .noise import NoiseSpec
from .pc import (
    DsepOracle,
    PcConfig,
    QueryRecord,
    ReconstructionResult,
    WsepOracle,
    apply_orientation_rules,
    orient_v_structures,
    pc_skeleton,
    reconstruct,
    reconstruct_with_oracle,
)
from .rational import ContinuousRational, RationalFilter, bilinear, frequency_response
from .spectral import (
    SpectralMatrix,
    WelchParams,
    WsepConfig,
    WsepResult,
    analytic_spectral_matrix,
    welch_cross_psd,
    wiener_from_psd,
    wsep,
)

__version__ = "0.1.0"
