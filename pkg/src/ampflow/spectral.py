"""Cross power spectral density estimation and frequency-domain Wiener tests.

``welch_cross_psd`` builds Hermitian cross-PSD matrices on an rfft grid by
averaged windowed periodograms; ``wiener_from_psd`` solves the per-bin
minimum-mean-square-error filter row; ``wsep`` turns the target component's
band-averaged magnitude into a separation decision against a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.signal import get_window

from .errors import InsufficientData, SingularPsd
from .model import Ldim, TimeSeriesSet, analytic_output_psd_grid

_WINDOWS = {"hann": "hann", "hamming": "hamming", "rect": "boxcar"}


@dataclass(frozen=True)
class WelchParams:
    """Averaged-periodogram settings. Segment length must be a power of two."""

    segment: int = 512
    overlap: float = 0.5
    window: str = "hann"

    def __post_init__(self):
        if self.segment < 16 or self.segment & (self.segment - 1):
            raise ValueError(f"segment must be a power of two >= 16, got {self.segment}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError(f"overlap must be in [0, 1), got {self.overlap}")
        if self.window not in _WINDOWS:
            raise ValueError(f"window must be one of {sorted(_WINDOWS)}, got {self.window!r}")


class SpectralMatrix:
    """Hermitian cross-PSD matrices on an ascending grid in [0, pi]."""

    __slots__ = ("_omegas", "_values", "_channels")

    def __init__(self, omegas: np.ndarray, values: np.ndarray, channels: Iterable[str]):
        omegas = np.asarray(omegas, dtype=float)
        values = np.asarray(values, dtype=complex)
        chans = tuple(str(c) for c in channels)
        n = len(chans)
        if len(set(chans)) != n:
            raise ValueError("channel labels must be unique")
        if omegas.ndim != 1 or values.shape != (omegas.size, n, n):
            raise ValueError(
                f"shape mismatch: {omegas.size} bins, {n} channels, values {values.shape}"
            )
        if omegas.size == 0:
            raise ValueError("need at least one frequency bin")
        if np.any(np.diff(omegas) <= 0) or omegas[0] < 0 or omegas[-1] > math.pi + 1e-12:
            raise ValueError("frequency grid must ascend within [0, pi]")
        scale = max(1.0, float(np.abs(values).max()))
        herm = np.abs(values - np.conj(np.swapaxes(values, 1, 2))).max()
        if herm > 1e-10 * scale:
            raise ValueError(f"matrices are not Hermitian (deviation {herm:.3g})")
        diag = np.diagonal(values, axis1=1, axis2=2)
        if np.abs(diag.imag).max() > 1e-10 * scale or diag.real.min() < -1e-10 * scale:
            raise ValueError("diagonals must be real and nonnegative")
        self._omegas = omegas
        self._values = values
        self._channels = chans

    @property
    def omegas(self) -> np.ndarray:
        return self._omegas

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def channels(self) -> tuple[str, ...]:
        return self._channels

    @property
    def n_channels(self) -> int:
        return len(self._channels)

    def index(self, channel: str) -> int:
        try:
            return self._channels.index(channel)
        except ValueError:
            raise KeyError(f"unknown channel {channel!r}") from None

    def band_indices(self, lo: float, hi: float) -> np.ndarray:
        mask = (self._omegas >= lo) & (self._omegas <= hi)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            raise ValueError(f"no grid bins inside [{lo}, {hi}]")
        return idx

    def entry(self, row: str, col: str) -> np.ndarray:
        return self._values[:, self.index(row), self.index(col)]

    def select(self, channels: Iterable[str]) -> "SpectralMatrix":
        """Submatrix over a channel subset; valid because the spectrum of a
        jointly stationary subprocess is the corresponding block."""
        chans = [str(c) for c in channels]
        idx = [self.index(c) for c in chans]
        return SpectralMatrix(self._omegas, self._values[:, idx, :][:, :, idx], chans)

    def to_csv(self, path) -> None:
        """Dump as CSV: omega then Re/Im of each entry in row-major order."""
        n = self.n_channels
        header = ["omega"]
        for i in range(n):
            for j in range(n):
                tag = f"{self._channels[i]}.{self._channels[j]}"
                header += [f"re_{tag}", f"im_{tag}"]
        flat = self._values.reshape(self._omegas.size, n * n)
        data = np.empty((self._omegas.size, 1 + 2 * n * n))
        data[:, 0] = self._omegas
        data[:, 1::2] = flat.real
        data[:, 2::2] = flat.imag
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def welch_cross_psd(ts: TimeSeriesSet, p: WelchParams = WelchParams()) -> SpectralMatrix:
    """Averaged windowed-periodogram cross-PSD matrix estimate.

    Segments are demeaned before windowing, and the estimate is normalized
    by the window power so unit-variance white noise measures a flat PSD
    of 1. Requires at least 8 segments.
    """
    values = ts.values
    n, nch = values.shape
    seg = p.segment
    if seg > n:
        raise InsufficientData(f"segment {seg} exceeds data length {n}")
    step = max(1, int(round(seg * (1.0 - p.overlap))))
    n_segs = 1 + (n - seg) // step
    if n_segs < 8:
        raise InsufficientData(f"only {n_segs} segments; need at least 8")
    win = get_window(_WINDOWS[p.window], seg, fftbins=True)
    u = float(np.dot(win, win))
    n_bins = seg // 2 + 1
    acc = np.zeros((n_bins, nch, nch), dtype=complex)
    batch = max(1, (1 << 24) // (seg * nch * 16))
    for start in range(0, n_segs, batch):
        stop = min(start + batch, n_segs)
        offs = np.arange(start, stop) * step
        segments = np.stack([values[o : o + seg, :] for o in offs])  # (b, seg, nch)
        segments = segments - segments.mean(axis=1, keepdims=True)
        spectra = np.fft.rfft(segments * win[None, :, None], axis=1)  # (b, bins, nch)
        # entry (i, j) estimates sum_d E[x_i(0) x_j(d)] e^(-j w d), i.e. conj(X_i) X_j
        acc += np.einsum("bfi,bfj->fij", np.conj(spectra), spectra)
    omegas = 2.0 * np.pi * np.arange(n_bins) / seg
    return SpectralMatrix(omegas, acc / (n_segs * u), ts.channels)


def analytic_spectral_matrix(
    m: Ldim, omegas: np.ndarray | None = None, n_bins: int = 513
) -> SpectralMatrix:
    """Exact model output cross-PSD on a grid (default: uniform over [0, pi])."""
    if omegas is None:
        omegas = np.linspace(0.0, math.pi, n_bins)
    omegas = np.asarray(omegas, dtype=float)
    return SpectralMatrix(omegas, analytic_output_psd_grid(m, omegas), m.channels)


@dataclass(frozen=True)
class WsepConfig:
    """Wiener-separation decision settings.

    ``band`` is the averaging interval in radians/sample; the default skips
    DC (flicker and detrending artifacts) and the warped near-Nyquist top.
    ``ridge`` is the relative diagonal loading for estimated matrices; keep
    it 0 for analytic inputs.
    """

    rho: float = 0.05
    band: tuple[float, float] = (0.05 * math.pi, 0.6 * math.pi)
    ridge: float = 1e-8

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be positive, got {self.rho}")
        lo, hi = self.band
        if not 0.0 < lo < hi < math.pi:
            raise ValueError(f"band must satisfy 0 < lo < hi < pi, got {self.band}")
        if not 0.0 <= self.ridge <= 1e-4:
            raise ValueError(f"ridge must be in [0, 1e-4], got {self.ridge}")


def wiener_from_psd(
    phi: SpectralMatrix,
    target: str,
    predictors: Iterable[str],
    ridge: float = 1e-8,
) -> np.ndarray:
    """Per-bin Wiener filter for estimating ``target`` from ``predictors``.

    Solves the normal equations W = Phi_xy (Phi_yy + ridge tr(Phi_yy)/m I)^-1
    at every bin; in this module's lag convention (entry (i, j) transforms
    E[x_i(0) x_j(d)]) they read (Phi_yy) w = Phi[predictors, target].
    Returns shape (n_bins, n_predictors) with columns in predictor order.
    """
    preds = [str(c) for c in predictors]
    if not preds:
        raise ValueError("predictor set must be nonempty")
    if target in preds:
        raise ValueError("target must not be one of the predictors")
    if len(set(preds)) != len(preds):
        raise ValueError("predictors must be distinct")
    t = phi.index(target)
    pidx = [phi.index(c) for c in preds]
    m = len(pidx)
    yy = phi.values[:, pidx, :][:, :, pidx]
    cross = phi.values[:, pidx, t]
    if ridge > 0:
        tr = np.trace(yy, axis1=1, axis2=2).real
        yy = yy + (ridge * tr / m)[:, None, None] * np.eye(m)[None, :, :]
    cond = np.linalg.cond(yy).max()
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularPsd(
            f"predictor PSD conditioning {cond:.3g} exceeds 1e12 "
            f"(target {target!r}, predictors {preds})"
        )
    return np.linalg.solve(yy, cross[:, :, None])[:, :, 0]


class WsepResult(NamedTuple):
    separated: bool
    statistic: float


def wsep(
    phi: SpectralMatrix,
    x: str,
    y: str,
    z: Iterable[str],
    cfg: WsepConfig = WsepConfig(),
) -> WsepResult:
    """Wiener-separation test of x from y given z.

    The statistic is the band-averaged magnitude of the Wiener component
    on x when predicting y from {x} | z; separation holds when it falls
    below the threshold. Only band bins are solved, so out-of-band
    degeneracies (a DC-blocked channel, the warped Nyquist bin) cannot
    poison the decision.
    """
    zset = {str(c) for c in z}
    if x == y or x in zset or y in zset:
        raise ValueError("x and y must be distinct and outside the conditioning set")
    order = {c: i for i, c in enumerate(phi.channels)}
    predictors = [x] + sorted(zset, key=order.__getitem__)
    band = phi.band_indices(*cfg.band)
    banded = SpectralMatrix(phi.omegas[band], phi.values[band], phi.channels)
    w = wiener_from_psd(banded, y, predictors, cfg.ridge)
    statistic = float(np.abs(w[:, 0]).mean())
    return WsepResult(statistic < cfg.rho, statistic)
