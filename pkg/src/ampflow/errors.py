"""Exception types shared across the package."""


class AmpflowError(Exception):
    """Base class for all errors raised by this package."""


class UnknownVertex(AmpflowError):
    """A vertex label is not part of the graph."""


class CyclicGraph(AmpflowError):
    """The operation requires an acyclic directed graph."""


class CyclicModel(AmpflowError):
    """The influence model's generative graph contains a cycle."""


class CyclicTopology(AmpflowError):
    """The netlist's tap connectivity contains a cycle."""


class InvalidNoise(AmpflowError):
    """A noise description violates its invariants."""


class NumericalSingularity(AmpflowError):
    """A matrix solve or filter evaluation is too ill-conditioned to trust."""


class MissingImpedance(AmpflowError):
    """An output node has no owning block or no load impedance."""


class UnstableDiscretization(AmpflowError):
    """A compiled filter has poles on or outside the unit circle."""


class SingularMapping(AmpflowError):
    """The rational function has a pole at the bilinear transform's singular point."""


class InsufficientData(AmpflowError):
    """Not enough samples for the requested spectral estimate."""


class SingularPsd(AmpflowError):
    """A spectral matrix is numerically singular even after ridge regularization."""


class VertexMismatch(AmpflowError):
    """Two graphs that must share a vertex set do not."""


class SchemaError(AmpflowError):
    """A serialized file violates its schema; message carries field context."""
