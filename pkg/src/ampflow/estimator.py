"""Scikit-learn style front end for influence-graph reconstruction.

``WienerPC`` follows the fit-and-expose convention of sklearn's graph
estimators: configure in ``__init__``, call ``fit(X)`` on an
(n_samples, n_channels) array, then read ``graph_`` / ``sepsets_`` /
``result_``. ``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator

from ._validation import check_channel_names, check_time_series_array
from .model import TimeSeriesSet
from .pc import PcConfig, reconstruct
from .spectral import WelchParams, WsepConfig


class WienerPC(BaseEstimator):
    """Reconstruct the influence graph of multichannel time series.

    PC search over a frequency-domain Wiener-separation oracle: a channel
    pair is judged independent given a conditioning set when the
    band-averaged magnitude of the corresponding Wiener filter component
    falls below ``rho``.

    Parameters
    ----------
    rho : separation threshold on the band-averaged filter magnitude.
    band : averaging band as fractions of Nyquist, e.g. (0.05, 0.6).
    segment, overlap, window : Welch cross-PSD settings.
    ridge : relative diagonal loading for the per-bin matrix solves.
    max_cond : cap on conditioning-set size (default: n_channels - 2).
    meek : apply the full Meek orientation closure instead of the two
        default propagation rules.
    fs_hz : sample rate attached to array input.
    channel_names : labels for array columns (default x0, x1, ...).

    Attributes
    ----------
    graph_ : MixedGraph, the reconstructed partially directed graph.
    sepsets_ : SepSetMap of the separating sets found.
    result_ : full ReconstructionResult including the query log.
    """

    def __init__(
        self,
        rho: float = 0.05,
        band: tuple[float, float] = (0.05, 0.6),
        segment: int = 512,
        overlap: float = 0.5,
        window: str = "hann",
        ridge: float = 1e-8,
        max_cond: int | None = None,
        meek: bool = False,
        fs_hz: float = 1.0,
        channel_names=None,
    ):
        self.rho = rho
        self.band = band
        self.segment = segment
        self.overlap = overlap
        self.window = window
        self.ridge = ridge
        self.max_cond = max_cond
        self.meek = meek
        self.fs_hz = fs_hz
        self.channel_names = channel_names

    def _config(self) -> PcConfig:
        lo, hi = self.band
        return PcConfig(
            max_cond=self.max_cond,
            wsep=WsepConfig(rho=self.rho, band=(lo * math.pi, hi * math.pi), ridge=self.ridge),
            welch=WelchParams(segment=self.segment, overlap=self.overlap, window=self.window),
            meek=self.meek,
        )

    def fit(self, X, y=None) -> "WienerPC":
        """Estimate the influence graph from (n_samples, n_channels) data."""
        if isinstance(X, TimeSeriesSet):
            ts = X
        else:
            arr = check_time_series_array(X, min_samples=8 * self.segment // 4)
            names = check_channel_names(self.channel_names, arr.shape[1])
            ts = TimeSeriesSet(names, arr, self.fs_hz)
        result = reconstruct(ts, self._config())
        self.channels_ = ts.channels
        self.n_features_in_ = len(ts.channels)
        self.graph_ = result.graph
        self.sepsets_ = result.sepsets
        self.result_ = result
        return self

    def fit_reconstruct(self, X, y=None):
        """Fit and return the full ReconstructionResult."""
        return self.fit(X, y).result_
