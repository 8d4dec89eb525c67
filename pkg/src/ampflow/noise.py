"""Per-channel noise model: white floor plus an IIR-shaped 1/f component.

The 1/f component is approximated by a cascade of first-order pole/zero
sections log-spaced over four decades below Nyquist (three sections per
decade at the default order), gain-calibrated so the flicker branch equals
the white floor at the corner frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidNoise
from .rational import ContinuousRational, RationalFilter, bilinear

_SPAN_DECADES = 4.0


@dataclass(frozen=True)
class NoiseSpec:
    """One independent noise component feeding a channel.

    ``variance`` is the white floor in V^2 per sample. A flicker component
    with PSD slope -10 dB/decade is added when ``flicker_corner_hz`` is set;
    ``flicker_order`` is the number of pole/zero sections in its IIR
    approximation. ``shaping`` filters the summed component (used by the
    compiler to apply per-stage noise transfers).
    """

    variance: float
    flicker_corner_hz: float | None = None
    flicker_order: int = 12
    shaping: RationalFilter | None = None

    def __post_init__(self):
        if not (math.isfinite(self.variance) and self.variance > 0):
            raise InvalidNoise(f"variance must be positive and finite, got {self.variance}")
        if self.flicker_corner_hz is not None:
            if not (math.isfinite(self.flicker_corner_hz) and self.flicker_corner_hz > 0):
                raise InvalidNoise(
                    f"flicker corner must be positive, got {self.flicker_corner_hz}"
                )
            if self.flicker_order < 1:
                raise InvalidNoise("flicker_order must be at least 1")

    def check_rate(self, fs_hz: float) -> None:
        """Corner frequencies must sit below Nyquist for the target rate."""
        if self.flicker_corner_hz is not None and self.flicker_corner_hz >= fs_hz / 2:
            raise InvalidNoise(
                f"flicker corner {self.flicker_corner_hz} Hz is not below "
                f"Nyquist ({fs_hz / 2} Hz)"
            )


def flicker_sections(corner_hz: float, order: int, fs_hz: float) -> tuple[list[RationalFilter], float]:
    """Digital pole/zero cascade and gain for the 1/f approximation.

    Returns ``(sections, gain)`` such that driving unit-variance white noise
    through the cascade and scaling by ``gain`` yields a stream whose PSD is
    ~1/f over the design span and equals 1.0 at ``corner_hz``.
    """
    nyquist = fs_hz / 2.0
    f_hi = nyquist
    f_lo = f_hi * 10.0 ** (-_SPAN_DECADES)
    ratio = (f_hi / f_lo) ** (1.0 / order)
    sections = []
    for i in range(order):
        fp = f_lo * ratio**i
        fz = fp * math.sqrt(ratio)
        wp, wz = 2 * math.pi * fp, 2 * math.pi * fz
        sections.append(bilinear(ContinuousRational((1.0, 1.0 / wz), (1.0, 1.0 / wp)), fs_hz))
    w_corner = 2 * math.pi * corner_hz / fs_hz
    mag2 = 1.0
    for sec in sections:
        mag2 *= abs(sec.response(w_corner)) ** 2
    return sections, 1.0 / math.sqrt(mag2)


def noise_psd(spec: NoiseSpec, omegas: np.ndarray, fs_hz: float) -> np.ndarray:
    """Component PSD on a radians/sample grid, in V^2 per radian-normalized bin."""
    spec.check_rate(fs_hz)
    omegas = np.asarray(omegas, dtype=float)
    psd = np.full(omegas.shape, spec.variance)
    if spec.flicker_corner_hz is not None:
        sections, gain = flicker_sections(spec.flicker_corner_hz, spec.flicker_order, fs_hz)
        fl = np.full(omegas.shape, spec.variance * gain**2)
        for sec in sections:
            fl *= np.abs(sec.response(omegas)) ** 2
        psd = psd + fl
    if spec.shaping is not None:
        psd = psd * np.abs(spec.shaping.response(omegas)) ** 2
    return psd


def _stream(seed: int, channel: int, component: int, branch: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, channel, component, branch)."""
    key = np.array(
        [np.uint64(seed), np.uint64((channel << 32) | (component << 8) | branch)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def synthesize(
    spec: NoiseSpec,
    n_samples: int,
    fs_hz: float,
    seed: int,
    channel: int,
    component: int = 0,
) -> np.ndarray:
    """Generate one component's sample stream, reproducible per (seed, channel)."""
    spec.check_rate(fs_hz)
    out = _stream(seed, channel, component, 0).normal(
        0.0, math.sqrt(spec.variance), n_samples
    )
    if spec.flicker_corner_hz is not None:
        sections, gain = flicker_sections(spec.flicker_corner_hz, spec.flicker_order, fs_hz)
        fl = _stream(seed, channel, component, 1).normal(0.0, 1.0, n_samples)
        for sec in sections:
            b, a = sec.ba()
            fl = lfilter(b, a, fl)
        out = out + math.sqrt(spec.variance) * gain * fl
    if spec.shaping is not None:
        b, a = spec.shaping.ba()
        out = lfilter(b, a, out)
    return out


def shaping_chain(spec: NoiseSpec, fs_hz: float) -> list[RationalFilter]:
    """Every filter a sample may pass through; used for burn-in sizing."""
    chain: list[RationalFilter] = []
    if spec.flicker_corner_hz is not None:
        sections, _ = flicker_sections(spec.flicker_corner_hz, spec.flicker_order, fs_hz)
        chain.extend(sections)
    if spec.shaping is not None:
        chain.append(spec.shaping)
    return chain
