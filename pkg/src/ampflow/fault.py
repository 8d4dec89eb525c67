"""Open-circuit fault detection by comparing graphs at the skeleton level.

A missing signal path shows up as a reference skeleton edge absent from
the reconstruction; spurious edges are reported symmetrically. Orientation
disagreements are informational only: skeleton-level recovery counts as
healthy even when edge directions were not resolved.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import VertexMismatch
from .graphs import DirectedGraph, MixedGraph, skeleton

HEALTHY = "HEALTHY"
FAULT_SUSPECTED = "FAULT_SUSPECTED"


@dataclass(frozen=True)
class FaultReport:
    """Skeleton differences between a reference and an observed graph."""

    missing: tuple[tuple[str, str], ...]
    extra: tuple[tuple[str, str], ...]
    orientation_disagreements: tuple[tuple[str, str], ...]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "missing_edges": [list(e) for e in self.missing],
            "extra_edges": [list(e) for e in self.extra],
            "orientation_disagreements": [list(e) for e in self.orientation_disagreements],
        }

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        lines.append("missing edges: " + (_fmt(self.missing) or "none"))
        lines.append("extra edges: " + (_fmt(self.extra) or "none"))
        if self.orientation_disagreements:
            lines.append(
                "orientation disagreements (informational): "
                + ", ".join(f"{a}->{b}" for a, b in self.orientation_disagreements)
            )
        return "\n".join(lines) + "\n"


def _fmt(pairs: tuple[tuple[str, str], ...]) -> str:
    return ", ".join(f"{a} - {b}" for a, b in pairs)


def diagnose(
    reference: DirectedGraph, observed: MixedGraph, mode: str = "skeleton"
) -> FaultReport:
    """Compare a reference generative graph against a reconstruction.

    The verdict is HEALTHY iff the two skeletons match exactly. In
    ``directed`` mode, edges whose observed orientation contradicts the
    reference are additionally listed; observed undirected edges never
    count as disagreements (a recovered skeleton with unresolved
    directions is not a fault).
    """
    if mode not in ("skeleton", "directed"):
        raise ValueError(f"mode must be 'skeleton' or 'directed', got {mode!r}")
    if set(reference.vertices) != set(observed.vertices):
        raise VertexMismatch(
            f"vertex sets differ: {sorted(reference.vertices)} vs {sorted(observed.vertices)}"
        )
    index = {v: i for i, v in enumerate(reference.vertices)}

    def ordered(pairs) -> tuple[tuple[str, str], ...]:
        out = [tuple(sorted(p, key=index.__getitem__)) for p in pairs]
        return tuple(sorted(out, key=lambda e: (index[e[0]], index[e[1]])))

    ref_pairs = skeleton(reference).skeleton_pairs()
    obs_pairs = observed.skeleton_pairs()
    missing = ordered(ref_pairs - obs_pairs)
    extra = ordered(obs_pairs - ref_pairs)

    disagreements: tuple[tuple[str, str], ...] = ()
    if mode == "directed":
        flipped = []
        for a, b in observed.directed_edges:
            if reference.has_edge(b, a) and not reference.has_edge(a, b):
                flipped.append((a, b))
        disagreements = tuple(
            sorted(flipped, key=lambda e: (index[e[0]], index[e[1]]))
        )

    verdict = HEALTHY if not missing and not extra else FAULT_SUSPECTED
    return FaultReport(missing, extra, disagreements, verdict)
