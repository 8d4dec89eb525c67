"""Linear dynamic influence models: validation, analytic output spectra,
noise-driven simulation, and file round-trips.

A model is a set of channels coupled by stable discrete-time filters with
zero diagonal, each channel driven by its own independent noise. The
coupling graph must be acyclic, which lets simulation run as direct
filtering in topological order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
from scipy.signal import lfilter

from . import noise as _noise
from .errors import CyclicGraph, CyclicModel, NumericalSingularity, SchemaError
from .graphs import DirectedGraph
from .noise import NoiseSpec
from .rational import RationalFilter

MODEL_SCHEMA = "ldim_model_v1"


class Ldim:
    """n-channel linear dynamic influence model.

    ``transfers`` maps (to, from) channel pairs to filters; absent entries
    are structural zeros. ``noise`` maps each channel to one or more
    independent :class:`NoiseSpec` components whose PSDs add.
    """

    __slots__ = ("_channels", "_transfers", "_noise", "_fs_hz", "_metadata")

    def __init__(
        self,
        channels: Iterable[str],
        transfers: Mapping[tuple[str, str], RationalFilter],
        noise: Mapping[str, NoiseSpec | Iterable[NoiseSpec]],
        fs_hz: float,
        metadata: Mapping[str, object] | None = None,
    ):
        chans = tuple(str(c) for c in channels)
        if len(set(chans)) != len(chans):
            raise ValueError("channel labels must be unique")
        if not chans:
            raise ValueError("a model needs at least one channel")
        if not (math.isfinite(fs_hz) and fs_hz > 0):
            raise ValueError(f"fs_hz must be positive, got {fs_hz}")
        known = set(chans)
        tmap: dict[tuple[str, str], RationalFilter] = {}
        for (to, frm), filt in transfers.items():
            if to not in known or frm not in known:
                raise ValueError(f"transfer ({to!r}, {frm!r}) references an unknown channel")
            if to == frm:
                raise ValueError(f"diagonal transfer on {to!r} not allowed")
            if not isinstance(filt, RationalFilter):
                raise TypeError("transfers must be RationalFilter instances")
            if all(c == 0.0 for c in filt.num):
                raise ValueError(f"transfer ({to!r}, {frm!r}) is identically zero; omit it")
            tmap[(to, frm)] = filt
        nmap: dict[str, tuple[NoiseSpec, ...]] = {}
        for ch in chans:
            if ch not in noise:
                raise ValueError(f"channel {ch!r} has no noise specification")
            specs = noise[ch]
            if isinstance(specs, NoiseSpec):
                specs = (specs,)
            specs = tuple(specs)
            if not specs:
                raise ValueError(f"channel {ch!r} has an empty noise specification")
            for spec in specs:
                spec.check_rate(fs_hz)
            nmap[ch] = specs
        self._channels = chans
        self._transfers = tmap
        self._noise = nmap
        self._fs_hz = float(fs_hz)
        self._metadata = dict(metadata or {})
        try:
            generative_graph(self).topological_order()
        except CyclicGraph as exc:
            raise CyclicModel(str(exc)) from exc

    @property
    def channels(self) -> tuple[str, ...]:
        return self._channels

    @property
    def transfers(self) -> Mapping[tuple[str, str], RationalFilter]:
        return MappingProxyType(self._transfers)

    @property
    def noise(self) -> Mapping[str, tuple[NoiseSpec, ...]]:
        return MappingProxyType(self._noise)

    @property
    def fs_hz(self) -> float:
        return self._fs_hz

    @property
    def metadata(self) -> Mapping[str, object]:
        return MappingProxyType(self._metadata)

    @property
    def n_channels(self) -> int:
        return len(self._channels)


def generative_graph(m: Ldim) -> DirectedGraph:
    """Directed graph with an edge i -> j for every present transfer into j."""
    edges = [(frm, to) for (to, frm) in m.transfers]
    return DirectedGraph(m.channels, edges)


def channel_noise_psd(m: Ldim, omegas: np.ndarray, channel: str) -> np.ndarray:
    """Summed noise PSD of one channel on a radians/sample grid."""
    psd = np.zeros(np.shape(omegas))
    for spec in m.noise[channel]:
        psd = psd + _noise.noise_psd(spec, omegas, m.fs_hz)
    return psd


def analytic_output_psd_grid(m: Ldim, omegas: np.ndarray) -> np.ndarray:
    """Exact output cross-PSD matrices, shape (n_bins, n, n).

    Closed form for the model equation: with transfer matrix H and diagonal
    noise PSD E, the output PSD is (I - H)^-1 E (I - H)^-H, computed here as
    B B^H with B = (I - H)^-1 sqrt(E), which is Hermitian and PSD by
    construction.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = m.n_channels
    idx = {c: i for i, c in enumerate(m.channels)}
    h = np.zeros((omegas.size, n, n), dtype=complex)
    for (to, frm), filt in m.transfers.items():
        h[:, idx[to], idx[frm]] = filt.response(omegas)
    a = np.eye(n)[None, :, :] - h
    cond = np.linalg.cond(a)
    if np.any(cond > 1e12):
        raise NumericalSingularity(
            f"I - H conditioning {cond.max():.3g} exceeds 1e12 on the grid"
        )
    root = np.empty((omegas.size, n), dtype=float)
    for ch in m.channels:
        root[:, idx[ch]] = np.sqrt(channel_noise_psd(m, omegas, ch))
    b = np.linalg.inv(a) * root[:, None, :]
    # transpose so entry (i, j) follows the lag convention E[x_i(0) x_j(d)]
    return np.swapaxes(b @ np.conj(np.swapaxes(b, 1, 2)), 1, 2)


def analytic_output_psd(m: Ldim, omega: float) -> np.ndarray:
    """Exact n-by-n output cross-PSD matrix at one frequency."""
    return analytic_output_psd_grid(m, np.array([float(omega)]))[0]


def chain_energy_length(
    filters: list[RationalFilter], energy_frac: float = 0.99, cap: int = 1 << 22
) -> int:
    """Samples capturing ``energy_frac`` of a filter cascade's impulse energy."""
    bas = [f.ba() for f in filters]
    if all(len(a) == 1 for _, a in bas):
        return max(1, sum(len(b) for b, _ in bas) - len(bas) + 1)
    states = [np.zeros(max(len(a), len(b)) - 1) for b, a in bas]
    chunks: list[np.ndarray] = []
    x = np.zeros(4096)
    x[0] = 1.0
    total = 0.0
    while True:
        y = x
        for i, (b, a) in enumerate(bas):
            y, states[i] = lfilter(b, a, y, zi=states[i])
        chunks.append(y)
        e = float(np.dot(y, y))
        total += e
        if e < 1e-12 * total or sum(len(c) for c in chunks) >= cap:
            break
        x = np.zeros(4096)
    energy = np.concatenate(chunks) ** 2
    cum = np.cumsum(energy)
    return int(np.searchsorted(cum, energy_frac * cum[-1]) + 1)


def impulse_energy_length(f: RationalFilter, energy_frac: float = 0.99, cap: int = 1 << 22) -> int:
    """Samples needed to capture ``energy_frac`` of the impulse response energy."""
    return chain_energy_length([f], energy_frac, cap)


def default_burn_in(m: Ldim) -> int:
    """Four times the longest 99%-energy impulse length of any model filter.

    A noise component's flicker cascade plus shaping counts as one filter,
    since its stream passes through the whole chain.
    """
    longest = 1
    for filt in m.transfers.values():
        longest = max(longest, impulse_energy_length(filt))
    for specs in m.noise.values():
        for spec in specs:
            chain = _noise.shaping_chain(spec, m.fs_hz)
            if chain:
                longest = max(longest, chain_energy_length(chain))
    return 4 * longest


class TimeSeriesSet:
    """Equal-length sampled channels plus their sample rate."""

    __slots__ = ("_channels", "_values", "_fs_hz")

    def __init__(self, channels: Iterable[str], values: np.ndarray, fs_hz: float):
        chans = tuple(str(c) for c in channels)
        if len(set(chans)) != len(chans):
            raise ValueError("channel labels must be unique")
        arr = np.ascontiguousarray(values, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"values must be 2-D (samples, channels), got shape {arr.shape}")
        if arr.shape[1] != len(chans):
            raise ValueError(f"{len(chans)} channels but {arr.shape[1]} data columns")
        if arr.shape[0] < 1:
            raise ValueError("need at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if not (math.isfinite(fs_hz) and fs_hz > 0):
            raise ValueError(f"fs_hz must be positive, got {fs_hz}")
        self._channels = chans
        self._values = arr
        self._fs_hz = float(fs_hz)

    @property
    def channels(self) -> tuple[str, ...]:
        return self._channels

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def fs_hz(self) -> float:
        return self._fs_hz

    @property
    def n_samples(self) -> int:
        return self._values.shape[0]

    def channel(self, name: str) -> np.ndarray:
        return self._values[:, self._channels.index(name)]

    def select(self, channels: Iterable[str]) -> "TimeSeriesSet":
        chans = [str(c) for c in channels]
        cols = [self._channels.index(c) for c in chans]
        return TimeSeriesSet(chans, self._values[:, cols], self._fs_hz)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# fs_hz={self._fs_hz!r}\n")
            fh.write(",".join(self._channels) + "\n")
            np.savetxt(fh, self._values, fmt="%.17g", delimiter=",")

    @classmethod
    def from_csv(cls, path) -> "TimeSeriesSet":
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
            if not first.startswith("# fs_hz="):
                raise SchemaError(f"{path}: first line must be '# fs_hz=<value>'")
            try:
                fs = float(first.split("=", 1)[1])
            except ValueError as exc:
                raise SchemaError(f"{path}: bad fs_hz value {first!r}") from exc
            header = fh.readline().strip()
            if not header:
                raise SchemaError(f"{path}: missing channel header row")
            chans = header.split(",")
            values = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(chans, values, fs)


def simulate(
    m: Ldim,
    n_samples: int,
    seed: int,
    burn_in: int | None = None,
    workers: int = 1,
) -> TimeSeriesSet:
    """Generate noise-driven output voltages of the model.

    Channels are produced in topological order: each is the sum of its
    parents passed through the corresponding transfer filters plus its own
    shaped noise. The first ``burn_in`` samples (default: sized from the
    slowest filter) are discarded so the retained stretch is effectively
    stationary. Output is bit-reproducible for a fixed seed regardless of
    ``workers``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if burn_in is None:
        burn_in = default_burn_in(m)
    total = n_samples + int(burn_in)
    order = generative_graph(m).topological_order()
    idx = {c: i for i, c in enumerate(m.channels)}

    def channel_noise(ch: str) -> np.ndarray:
        acc = np.zeros(total)
        for k, spec in enumerate(m.noise[ch]):
            acc += _noise.synthesize(spec, total, m.fs_hz, seed, idx[ch], k)
        return acc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            streams = dict(zip(m.channels, pool.map(channel_noise, m.channels)))
    else:
        streams = {ch: channel_noise(ch) for ch in m.channels}

    data: dict[str, np.ndarray] = {}
    for ch in order:
        acc = streams[ch]
        for frm in m.channels:
            filt = m.transfers.get((ch, frm))
            if filt is not None:
                b, a = filt.ba()
                acc = acc + lfilter(b, a, data[frm])
        data[ch] = acc
    out = np.column_stack([data[c][burn_in:] for c in m.channels])
    return TimeSeriesSet(m.channels, out, m.fs_hz)


def _filter_to_json(f: RationalFilter | None):
    if f is None:
        return None
    return {"num": list(f.num), "den": list(f.den)}


def _filter_from_json(obj, where: str) -> RationalFilter:
    if not isinstance(obj, dict) or "num" not in obj or "den" not in obj:
        raise SchemaError(f"{where}: expected an object with 'num' and 'den' arrays")
    return RationalFilter(tuple(obj["num"]), tuple(obj["den"]))


def ldim_to_dict(m: Ldim) -> dict:
    idx = {c: i for i, c in enumerate(m.channels)}
    transfers = [
        {"to": to, "from": frm, "num": list(f.num), "den": list(f.den)}
        for (to, frm), f in sorted(m.transfers.items(), key=lambda kv: (idx[kv[0][0]], idx[kv[0][1]]))
    ]
    noise = {
        ch: [
            {
                "variance": s.variance,
                "flicker_corner_hz": s.flicker_corner_hz,
                "flicker_order": s.flicker_order,
                "shaping": _filter_to_json(s.shaping),
            }
            for s in m.noise[ch]
        ]
        for ch in m.channels
    }
    return {
        "schema": MODEL_SCHEMA,
        "fs_hz": m.fs_hz,
        "channels": list(m.channels),
        "transfers": transfers,
        "noise": noise,
        "metadata": dict(m.metadata),
    }


def ldim_from_dict(obj: dict) -> Ldim:
    if not isinstance(obj, dict) or obj.get("schema") != MODEL_SCHEMA:
        raise SchemaError(f"schema: expected {MODEL_SCHEMA!r}, got {obj.get('schema')!r}")
    for field in ("fs_hz", "channels", "transfers", "noise"):
        if field not in obj:
            raise SchemaError(f"{field}: missing required field")
    transfers = {}
    for i, row in enumerate(obj["transfers"]):
        where = f"transfers[{i}]"
        if "to" not in row or "from" not in row:
            raise SchemaError(f"{where}: missing 'to'/'from'")
        transfers[(row["to"], row["from"])] = _filter_from_json(row, where)
    noise = {}
    for ch, rows in obj["noise"].items():
        specs = []
        for i, row in enumerate(rows):
            where = f"noise[{ch}][{i}]"
            if "variance" not in row:
                raise SchemaError(f"{where}: missing 'variance'")
            shaping = row.get("shaping")
            specs.append(
                NoiseSpec(
                    variance=float(row["variance"]),
                    flicker_corner_hz=row.get("flicker_corner_hz"),
                    flicker_order=int(row.get("flicker_order", 12)),
                    shaping=None if shaping is None else _filter_from_json(shaping, where),
                )
            )
        noise[ch] = tuple(specs)
    return Ldim(
        obj["channels"], transfers, noise, float(obj["fs_hz"]), obj.get("metadata") or {}
    )


def save_ldim(m: Ldim, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(ldim_to_dict(m), fh, indent=2)
        fh.write("\n")


def load_ldim(path) -> Ldim:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return ldim_from_dict(obj)
